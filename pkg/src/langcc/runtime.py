"""Table-driven parse runtime.

Executes Shift/Reduce/Recur/Ret/Accept over the token stream and assembles
generic AST nodes.  Synthesized nonterminals (lists, optionals, alternation
enums) are collapsed during reduction, so users only ever see nodes of their
own rule variants, sequences, options, booleans, and enum labels; every
value carries its source bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .compiled import CompiledLang
from .lexer import EOF_TERMINAL, LexError, lex, token_bounds_to_linecol
from .spec_ast import SpecError


@dataclass(frozen=True)
class Bounds:
    start: int  # byte offsets
    end: int
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TokenLeaf:
    terminal: str
    text: str
    bounds: Bounds


@dataclass(frozen=True)
class EnumVal:
    label: str
    bounds: Bounds


@dataclass(frozen=True)
class SeqVal:
    items: tuple
    trailing: bool
    bounds: Bounds


class Node:
    __slots__ = ("variant", "fields", "bounds")

    def __init__(self, variant: Tuple[str, ...], fields: Tuple[Tuple[str, object], ...],
                 bounds: Bounds):
        self.variant = variant
        self.fields = fields
        self.bounds = bounds

    def field(self, name: str):
        for fname, v in self.fields:
            if fname == name:
                return v
        raise KeyError(name)

    def has_variant_prefix(self, prefix: Tuple[str, ...]) -> bool:
        return self.variant[: len(prefix)] == prefix

    def __repr__(self):
        return "Node(%s)" % render_node(self)

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return self.variant == other.variant and self.fields == other.fields

    def __hash__(self):
        return hash((self.variant, self.fields))


@dataclass
class ParseError:
    message: str
    bounds: Tuple[int, int]
    location_block: str

    def __str__(self):
        return "%s\n%s" % (self.message, self.location_block)


@dataclass
class ParseResult:
    result: Optional[Node]
    err: Optional[ParseError]
    extracts: list

    def is_success(self) -> bool:
        return self.err is None


def location_fmt_str(text: str, bounds: Tuple[int, int]) -> str:
    """Render the standard location block:

        Line L, column C:
        <blank>
          <source line>
          <caret under column C>

    The caret line is padded with spaces out to one column past the end of
    the source line.
    """
    line, col = token_bounds_to_linecol(text, bounds[0])
    lines = text.split("\n")
    src = lines[line - 1] if line - 1 < len(lines) else ""
    width = len(src)
    caret = " " * (col - 1) + "^" + " " * (width + 1 - col)
    return "Line %d, column %d:\n\n  %s\n  %s\n" % (line, col, src, caret)


# ---------------------------------------------------------------------------
# Parsing

def _is_empty_bounds(b: Bounds) -> bool:
    return b.start == b.end


class _LineIndex:
    """Byte offset -> 1-based (line, col) with one upfront scan of the input."""

    def __init__(self, text: str):
        self.text = text
        data = text.encode("utf-8")
        self.data = data
        self.newlines = [i for i, b in enumerate(data) if b == 0x0A]

    def linecol(self, offset: int) -> Tuple[int, int]:
        import bisect

        line_idx = bisect.bisect_right(self.newlines, offset - 1)
        line_start = 0 if line_idx == 0 else self.newlines[line_idx - 1] + 1
        col = len(self.data[line_start:offset].decode("utf-8")) + 1
        return (line_idx + 1, col)

    def bounds(self, start: int, end: int) -> Bounds:
        sl, sc = self.linecol(start)
        el, ec = self.linecol(end)
        return Bounds(start, end, sl, sc, el, ec)


def parse(compiled: CompiledLang, text: str, start: Optional[str] = None) -> ParseResult:
    """Lex then run the LR engine; exactly one of result / err is set."""
    if start is None:
        start = compiled.default_start
    if start not in compiled.starts:
        raise SpecError("%r is not a main nonterminal (mains: %s)"
                        % (start, ", ".join(compiled.mains)))
    lines = _LineIndex(text)
    try:
        lexed = lex(compiled.lexer, text)
    except LexError as e:
        msg = _lex_error_message(e, text)
        b = (e.offset, e.offset)
        return ParseResult(None, ParseError(msg, b, location_fmt_str(text, b)), [])

    toks = lexed.tokens
    k = compiled.k
    terms = [t.terminal for t in toks] + [EOF_TERMINAL] * k

    states = [compiled.starts[start]]
    values: List[object] = []
    vbounds: List[Bounds] = []
    pos = 0
    n_toks = len(toks)

    def next_start_byte() -> int:
        return toks[pos].start if pos < n_toks else len(text.encode("utf-8"))

    while True:
        la = tuple(terms[pos: pos + k])
        acts = compiled.action.get((states[-1], la))
        if acts is None and compiled.rd:
            acts = compiled.action.get((states[-1], ("\u22a4",) * k))
        if not acts:
            return ParseResult(None, _unexpected(compiled, text, lines, toks, pos),
                               lexed.extracts)
        assert len(acts) == 1, "conflicted tables cannot drive the runtime"
        act = acts[0]
        tag = act[0]

        if tag == "shift":
            tok = toks[pos]
            values.append(TokenLeaf(tok.terminal, tok.text,
                                    lines.bounds(tok.start, tok.end)))
            vbounds.append(values[-1].bounds)
            states.append(act[1])
            pos += 1
        elif tag == "accept":
            assert len(values) == 1
            root = values[0]
            assert isinstance(root, Node)
            return ParseResult(root, None, lexed.extracts)
        elif tag == "recur":
            states.append(act[2])
        elif tag == "ret":
            v = values[-1]
            b = vbounds[-1]
            del values[-1], vbounds[-1]
            states.pop()  # state reached on the completed nonterminal
            states.pop()  # the sub-automaton start
            target = compiled.goto.get((states[-1], ("n", act[1])))
            assert target is not None, "missing goto after ret"
            states.append(target)
            values.append(v)
            vbounds.append(b)
        else:  # reduce
            pi = act[1]
            prod = compiled.prods[pi]
            kind, rhs_len, lhs_ref = prod[0], prod[1], prod[2]
            popped = values[len(values) - rhs_len:] if rhs_len else []
            popped_bounds = vbounds[len(vbounds) - rhs_len:] if rhs_len else []
            if rhs_len:
                del values[len(values) - rhs_len:]
                del vbounds[len(vbounds) - rhs_len:]
                del states[len(states) - rhs_len:]
            if popped_bounds:
                span = lines.bounds(popped_bounds[0].start, popped_bounds[-1].end)
            else:
                at = next_start_byte()
                span = lines.bounds(at, at)
            value = _assemble(prod, popped, span)
            target = compiled.goto.get((states[-1], ("n", lhs_ref)))
            assert target is not None, "missing goto for %s in state %d" % (
                lhs_ref, states[-1])
            states.append(target)
            values.append(value)
            vbounds.append(span)


def _assemble(prod, popped, span: Bounds):
    kind = prod[0]
    if kind == "user":
        variant_key, fields = prod[3], prod[4]
        out = []
        for name, src in fields:
            if src[0] == "slot":
                out.append((name, popped[src[1]]))
            else:  # enum_inline
                idx, label = src[1], src[2]
                out.append((name, EnumVal(label, popped[idx].bounds)))
        return Node(tuple(variant_key.split("::")), tuple(out), span)
    if kind == "enum":
        return EnumVal(prod[3][0], span)
    # chain productions build plain lists; each chain value is popped exactly
    # once, so in-place append keeps long lists linear
    if kind == "list_empty":
        return SeqVal((), False, span)
    if kind == "list_single":
        return [popped[prod[3][0]]]
    if kind == "list_pair":
        a, b = prod[3]
        return [popped[a], popped[b]]
    if kind == "list_append":
        chain_idx, elem_idx = prod[3]
        left = popped[chain_idx]
        left.append(popped[elem_idx])
        return left
    if kind == "list_pass":
        return SeqVal(tuple(popped[prod[3][0]]), False, span)
    if kind == "list_trail":
        return SeqVal(tuple(popped[prod[3][0]]), True, span)
    if kind == "opt_none":
        return False if prod[3][0] == 1 else None
    if kind == "opt_some":
        content = prod[3][0]
        if content < 0:
            return True
        return popped[content]
    raise AssertionError(kind)


def _lex_error_message(e: LexError, text: str) -> str:
    if e.kind == "no_match":
        data = text.encode("utf-8")
        ch = data[e.offset: e.offset + 4].decode("utf-8", "replace")[:1]
        return "Lexing error: unexpected character: `%s`" % ch
    if e.kind == "premature_empty":
        return "Lexing error: mode stack emptied before end of input"
    return "Lexing error: unterminated input (%s)" % e.detail


def _unexpected(compiled, text, lines, toks, pos) -> ParseError:
    if pos < len(toks):
        tok = toks[pos]
        msg = "Unexpected token: `%s`" % tok.text
        b = (tok.start, tok.end)
    else:
        msg = "Unexpected end of input"
        end = len(text.encode("utf-8"))
        b = (end, end)
    return ParseError(msg, b, location_fmt_str(text, b))


# ---------------------------------------------------------------------------
# Downcasting and rendering

def node_downcast(compiled: CompiledLang, n: Node, path) -> Optional[Node]:
    """View n as the given variant prefix (e.g. "Expr::Lit"); None if it isn't."""
    if isinstance(path, str):
        path = tuple(path.split("::"))
    path = tuple(path)
    if path not in compiled.variant_prefixes:
        raise SpecError("unknown variant path %s" % "::".join(path))
    return n if n.has_variant_prefix(path) else None


def _render_value(v) -> str:
    if isinstance(v, Node):
        return render_node(v)
    if isinstance(v, TokenLeaf):
        return '"%s"' % v.text.replace("\\", "\\\\").replace('"', '\\"')
    if isinstance(v, EnumVal):
        return v.label
    if isinstance(v, SeqVal):
        return "[%s]" % ", ".join(_render_value(x) for x in v.items)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    raise TypeError(v)


def render_node(n: Node) -> str:
    body = ", ".join("%s: %s" % (name, _render_value(v)) for name, v in n.fields)
    return "%s{%s}" % ("::".join(n.variant), body)


# ---------------------------------------------------------------------------
# Schema conformance

def node_to_data_value(compiled: CompiledLang, n: Node):
    """Convert a Node to the datatype value layer for schema validation."""
    from .datacc import DataValue

    vk = "::".join(n.variant)
    fields = []
    for name, v in n.fields:
        kind = compiled.field_kind(vk, name)
        fields.append((name, _value_to_data(compiled, v, kind, vk, name)))
    return DataValue(n.variant, tuple(fields))


def _value_to_data(compiled, v, kind, vk, fname):
    from .datacc import DataValue

    tag = kind[0]
    if tag == "token":
        assert isinstance(v, TokenLeaf), (vk, fname, v)
        return v.text
    if tag == "node":
        assert isinstance(v, Node)
        return node_to_data_value(compiled, v)
    if tag == "seq":
        assert isinstance(v, SeqVal)
        return tuple(_value_to_data(compiled, item, kind[1], vk, fname)
                     for item in v.items)
    if tag == "opt":
        if v is None:
            return None
        return _value_to_data(compiled, v, kind[1], vk, fname)
    if tag == "bool":
        assert isinstance(v, bool)
        return v
    if tag == "enum":
        assert isinstance(v, EnumVal)
        enum_type = "_".join(vk.split("::") + [fname])
        return DataValue((enum_type, v.label), ())
    raise AssertionError(kind)


def validate_node(compiled: CompiledLang, schema, n: Node) -> bool:
    """Check a parsed Node against the derived AST datatype schema."""
    from .datacc import conforms

    return conforms(schema, node_to_data_value(compiled, n))
