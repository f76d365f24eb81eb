import pytest

from langcc import (
    derive_ast_schema, location_fmt_str, node_downcast, parse, render_node,
    validate_node,
)
from langcc.runtime import Node, SeqVal, TokenLeaf
from langcc.spec_ast import SpecError

ERROR_BLOCK = (
    "Line 1, column 10:\n"
    "\n"
    "  7 + (5 + / 3)\n"
    "           ^    \n"
)


def test_unexpected_token_error_block(calc):
    res = parse(calc.compiled, "7 + (5 + / 3)")
    assert not res.is_success()
    assert res.err.message == "Unexpected token: `/`"
    assert res.err.location_block == ERROR_BLOCK
    assert res.err.bounds == (9, 10)


def test_single_int_statement(calc):
    res = parse(calc.compiled, "1")
    assert res.is_success()
    assert render_node(res.result) == 'Stmt::Expr{x: Expr::Lit::Int_{val: "1"}}'


def test_empty_input_unexpected_eof(calc):
    res = parse(calc.compiled, "")
    assert not res.is_success()
    assert res.err.message == "Unexpected end of input"
    assert res.err.bounds == (0, 0)


def test_default_start_is_first_main(calc):
    # mains are (Stmt, Expr); `1 + 2` parses as a Stmt by default
    res = parse(calc.compiled, "1 + 2")
    assert res.result.variant[0] == "Stmt"
    res2 = parse(calc.compiled, "1 + 2", start="Expr")
    assert res2.result.variant[0] == "Expr"
    with pytest.raises(SpecError, match="not a main nonterminal"):
        parse(calc.compiled, "1", start="Nope")


def test_attribute_requirement_enforced(calc):
    # only Expr.Id declares I, so only identifiers may be assigned to
    assert parse(calc.compiled, "x = 1").is_success()
    res = parse(calc.compiled, "1 = 2")
    assert not res.is_success()
    assert res.err.message == "Unexpected token: `=`"


def test_location_fmt_str_examples():
    assert location_fmt_str("7 + (5 + / 3)", (9, 10)) == ERROR_BLOCK
    blame = location_fmt_str("4 / (3 - (15 / 5))", (2, 3))
    assert blame == (
        "Line 1, column 3:\n"
        "\n"
        "  4 / (3 - (15 / 5))\n"
        "    ^                \n"
    )
    assert location_fmt_str("x", (0, 1)) == "Line 1, column 1:\n\n  x\n  ^ \n"


def test_location_fmt_str_second_line():
    block = location_fmt_str("a = 1\nbb = 2", (6, 8))
    assert block.startswith("Line 2, column 1:")
    assert "  bb = 2\n" in block


def test_node_downcast(calc):
    res = parse(calc.compiled, "1")
    node = res.result
    assert node_downcast(calc.compiled, node, "Stmt") is node
    x = node.field("x")
    assert node_downcast(calc.compiled, x, "Expr::Lit") is x
    assert node_downcast(calc.compiled, x, "Expr::Id") is None
    with pytest.raises(SpecError, match="unknown variant path"):
        node_downcast(calc.compiled, node, "Zzz")


def test_lexing_error_surfaces_as_parse_error(calc):
    res = parse(calc.compiled, "1 ? 2")
    assert not res.is_success()
    assert "unexpected character" in res.err.message
    assert res.err.bounds == (2, 2)


def _walk_bounds(value, out):
    if isinstance(value, Node):
        out.append(value.bounds)
        for _n, v in value.fields:
            _walk_bounds(v, out)
    elif isinstance(value, SeqVal):
        for item in value.items:
            _walk_bounds(item, out)
    elif isinstance(value, TokenLeaf):
        out.append(value.bounds)


def test_bounds_nesting(calc):
    res = parse(calc.compiled, "x = (1 + 2) * -3")
    assert res.is_success()

    def check(node):
        if not isinstance(node, Node):
            return
        for _n, v in node.fields:
            if isinstance(v, (Node, TokenLeaf)):
                assert node.bounds.start <= v.bounds.start
                assert v.bounds.end <= node.bounds.end
            if isinstance(v, Node):
                check(v)

    check(res.result)
    # sibling fields are ordered and disjoint
    root = res.result
    spans = []
    _walk_bounds(root.field("x"), spans)
    left_max = max(b.end for b in spans)
    spans_y = []
    _walk_bounds(root.field("y"), spans_y)
    assert left_max <= min(b.start for b in spans_y)


def test_bounds_cover_token_span(calc):
    res = parse(calc.compiled, "x = (1 + 2) * 3")
    y = res.result.field("y")
    assert (y.bounds.start, y.bounds.end) == (4, 15)
    assert (y.bounds.start_line, y.bounds.start_col) == (1, 5)


def test_schema_conformance_of_parsed_nodes(calc):
    schema = derive_ast_schema(calc.cfg)
    for text in ["1", "x = 1 + 2 * 3", "-(1) ^ 2", "x = (y)"]:
        res = parse(calc.compiled, text)
        assert res.is_success(), text
        assert validate_node(calc.compiled, schema, res.result)


def test_error_offsets_match_marked_tests(calc, parens, sum_list, meta):
    for result in (calc, parens, sum_list, meta):
        for t in result.spec.parse_tests:
            if t.expected_fail_offset is None:
                continue
            res = parse(result.compiled, t.input)
            assert not res.is_success(), t.input
            assert res.err.bounds[0] == t.expected_fail_offset, t.input


def test_extracts_attached_outside_ast(calc):
    res = parse(calc.compiled, "1 + 1 // note")
    assert res.is_success()
    assert [(e.mode, e.text) for e in res.extracts] == [("comment_single", "// note")]
    assert "note" not in render_node(res.result)


def test_parse_is_repeatable(calc):
    a = parse(calc.compiled, "x = 1 + 2")
    b = parse(calc.compiled, "x = 1 + 2")
    assert render_node(a.result) == render_node(b.result)
    assert a.result == b.result


def test_rd_parse_tree_matches_unfolded():
    from langcc import compile_lang
    from conftest import load_grammar

    src = load_grammar("rd_tiny.lang")
    with_rd = compile_lang(src, rd=True)
    without = compile_lang(src, rd=False)
    a = parse(with_rd.compiled, "abc")
    b = parse(without.compiled, "abc")
    assert a.is_success() and b.is_success()
    assert render_node(a.result) == render_node(b.result)


def test_concurrent_parses_share_compiled(calc):
    # CompiledLang is immutable; each parse owns its stacks
    from concurrent.futures import ThreadPoolExecutor

    inputs = ["x = %d + %d * 2" % (i, i) for i in range(16)]
    expected = [render_node(parse(calc.compiled, s).result) for s in inputs]
    with ThreadPoolExecutor(max_workers=8) as pool:
        got = list(pool.map(lambda s: render_node(parse(calc.compiled, s).result),
                            inputs))
    assert got == expected
