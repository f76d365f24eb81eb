import random

import pytest

from langcc import compile_lexer, lex, parse_lang_spec, token_bounds_to_linecol
from langcc.lexer import LexAmbiguity, LexCompileError, LexError, Nfa, Tag
from langcc.spec_ast import RAlt, RConcat, RLit, RRange, RStar

from conftest import load_grammar


def _lexer_for(src):
    return compile_lexer(parse_lang_spec(src))


def test_calc_lexer_two_modes_no_ambiguity():
    lx = _lexer_for(load_grammar("calc.lang"))
    assert sorted(lx.dfas) == ["body", "comment_single"]


def test_overlapping_rules_ambiguity_witness():
    src = """
tokens { top <= `z`; }
lexer {
    main { body }
    mode body {
        `a` => { emit; }
        `a`..`b` => { pass; }
        eof => { pop; }
    }
}
parser { main { S } S.One <- `z`; }
"""
    with pytest.raises(LexAmbiguity) as exc:
        _lexer_for(src)
    assert exc.value.witness == "a"
    assert exc.value.mode == "body"
    assert len(exc.value.tags) == 2


def test_eof_only_mode():
    src = """
tokens { top <= `z`; }
lexer { main { body } mode body { top => { emit; } eof => { pop; } } }
parser { main { S } S.One <- `z`; }
"""
    lx = _lexer_for(src)
    out = lex(lx, "")
    assert out.tokens == []
    assert out.extracts == []


def test_comment_mode_machine():
    lx = _lexer_for(load_grammar("calc.lang"))
    out = lex(lx, "x = 1 // hi\n")
    assert [(t.terminal, t.text) for t in out.tokens] == [
        ("id", "x"), ("`=`", "="), ("int_lit", "1")]
    assert [(e.mode, e.text) for e in out.extracts] == [("comment_single", "// hi")]
    # the newline after the comment is reprocessed by the body mode
    assert out.extracts[0].end == len("x = 1 // hi")


def test_maximal_munch_stops_at_zero():
    lx = _lexer_for(load_grammar("calc.lang"))
    out = lex(lx, "01")
    assert [(t.terminal, t.text) for t in out.tokens] == [
        ("int_lit", "0"), ("int_lit", "1")]


def test_comment_at_eof_extracts():
    lx = _lexer_for(load_grammar("calc.lang"))
    out = lex(lx, "1 // tail")
    assert [(e.mode, e.text) for e in out.extracts] == [("comment_single", "// tail")]


def test_no_match_error_offset():
    lx = _lexer_for(load_grammar("calc.lang"))
    with pytest.raises(LexError) as exc:
        lex(lx, "1 ? 2")
    assert exc.value.kind == "no_match"
    assert exc.value.offset == 2


def test_unterminated_string_mode_fails():
    lx = _lexer_for(load_grammar("meta.lang"))
    with pytest.raises(LexError) as exc:
        lex(lx, "tokens { a <- `oops")
    assert exc.value.kind == "stack_nonempty_at_eof"


def test_keyword_literals_beat_identifier_pattern():
    lx = _lexer_for(load_grammar("meta.lang"))
    toks = [(t.terminal, t.text) for t in lex(lx, "mode modex pr prq _ _x").tokens]
    assert toks == [("`mode`", "mode"), ("id", "modex"), ("`pr`", "pr"),
                    ("id", "prq"), ("`_`", "_"), ("id", "_x")]


def test_string_mode_pop_emit_spans_and_escapes():
    lx = _lexer_for(load_grammar("meta.lang"))
    out = lex(lx, "a <- `x\\`y`;")
    strs = [t for t in out.tokens if t.terminal == "str_lit"]
    assert len(strs) == 1
    assert strs[0].text == "`x\\`y`"
    assert (strs[0].start, strs[0].end) == (5, 11)


def test_emit_without_token_identity_rejected():
    src = """
tokens { top <= `a` `b`; }
lexer { main { body } mode body { top => { emit; } eof => { pop; } } }
parser { main { S } S.One <- `z`; }
"""
    with pytest.raises(LexCompileError, match="token identity"):
        _lexer_for(src)


def test_nullable_rule_pattern_rejected():
    src = """
tokens { top <= `a`; }
lexer { main { body } mode body { top => { emit; } `x`* => { pass; } eof => { pop; } } }
parser { main { S } S.One <- `a`; }
"""
    with pytest.raises(LexCompileError, match="empty string"):
        _lexer_for(src)


def test_linecol_examples():
    assert token_bounds_to_linecol("7 + (5 + / 3)", 9) == (1, 10)
    assert token_bounds_to_linecol("4 / (3 - (15 / 5))", 2) == (1, 3)
    assert token_bounds_to_linecol("anything", 0) == (1, 1)
    assert token_bounds_to_linecol("a\nbc", 3) == (2, 2)
    # columns count codepoints, offsets count bytes
    assert token_bounds_to_linecol("éx", 2) == (1, 2)


def test_lex_deterministic(calc):
    lx = calc.lexer
    a = lex(lx, "x = 1 + 2 // c\n")
    b = lex(lx, "x = 1 + 2 // c\n")
    assert a.tokens == b.tokens and a.extracts == b.extracts


def test_coverage_partition(calc):
    text = "x = (1 + 2) // note\n"
    out = lex(calc.lexer, text)
    # token spans are ordered and disjoint
    spans = [(t.start, t.end) for t in out.tokens]
    assert spans == sorted(spans)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 <= s2


# -- randomized NFA vs DFA equivalence ---------------------------------------

def _random_regex(rng, depth):
    if depth == 0:
        return rng.choice([RLit("a"), RLit("b"), RLit("ab"), RRange("a", "b")])
    kind = rng.randrange(4)
    if kind == 0:
        return RConcat(tuple(_random_regex(rng, depth - 1)
                             for _ in range(rng.randrange(1, 3))))
    if kind == 1:
        return RAlt(tuple(_random_regex(rng, depth - 1)
                          for _ in range(rng.randrange(1, 3))))
    if kind == 2:
        return RStar(_random_regex(rng, depth - 1))
    return _random_regex(rng, depth - 1)


def _all_strings(alphabet, max_len):
    out = [""]
    layer = [""]
    for _ in range(max_len):
        layer = [s + c for s in layer for c in alphabet]
        out.extend(layer)
    return out


def test_subset_construction_matches_nfa_simulation():
    from langcc.lexer import _subset_construct

    rng = random.Random(42)
    strings = _all_strings("ab", 6)
    cases = 0
    for i in range(500):
        regex = _random_regex(rng, rng.randrange(1, 5))
        nfa = Nfa()
        end = nfa.add_regex(regex, nfa.start)
        nfa.accepts[end] = Tag(0, None, False, False)
        dfa = _subset_construct("m", nfa)

        def dfa_accepts(s):
            state = dfa.start
            for ch in s:
                state = dfa.step(state, ord(ch))
                if state < 0:
                    return False
            return dfa.accept(state) is not None

        for s in strings:
            assert dfa_accepts(s) == (nfa.simulate(s) is not None), (regex, s)
        cases += 1
    assert cases == 500


def test_compile_time_safety_unique_accept_tags(calc):
    for dfa in calc.lexer.dfas.values():
        for transitions, eof_target, accept in dfa.states:
            if accept is not None:
                rule, token = accept
                assert isinstance(rule, int)


def test_dump_is_deterministic(calc):
    assert calc.lexer.dump() == calc.lexer.dump()
    assert "mode body" in calc.lexer.dump()
