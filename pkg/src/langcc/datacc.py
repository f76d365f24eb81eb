"""datacc: declarative algebraic datatypes with a value layer.

Parses `.data` specifications into a DatatypeSchema (named product and sum
types, enums as sums of empty products, type parameters) and provides
schema-checked immutable values with downcasting, field substitution,
deterministic debug printing, and cached value-based SHA-256 hashing.

The `.data` surface syntax:

    data Color { Red; Green; Blue; }
    data Pair[T] { fst: T; snd: T; }
    data Expr {
        Lit { val: string; }
        Id { name: string; }
    }

Builtins: integer, string, boolean, [T] (sequence), T? (option).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .spec_ast import Loc, SpecError


# ---------------------------------------------------------------------------
# Schema model

@dataclass(frozen=True)
class TRef:
    name: str
    args: Tuple["TypeExpr", ...] = ()


@dataclass(frozen=True)
class TSeq:
    elem: "TypeExpr"


@dataclass(frozen=True)
class TOpt:
    elem: "TypeExpr"


TypeExpr = Union[TRef, TSeq, TOpt]

BUILTINS = ("integer", "string", "boolean")


@dataclass(frozen=True)
class Product:
    fields: Tuple[Tuple[str, TypeExpr], ...]


@dataclass(frozen=True)
class Sum:
    cases: Tuple[Tuple[str, "TypeDef"], ...]

    def is_enum(self) -> bool:
        return all(isinstance(d, Product) and not d.fields for _n, d in self.cases)


TypeDef = Union[Product, Sum]


@dataclass(frozen=True)
class DatatypeSchema:
    types: Tuple[Tuple[str, TypeDef], ...]
    type_params: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def type_map(self) -> Dict[str, TypeDef]:
        return dict(self.types)

    def params_of(self, name: str) -> Tuple[str, ...]:
        for n, ps in self.type_params:
            if n == name:
                return ps
        return ()

    def resolve_path(self, path: Tuple[str, ...]) -> Optional[TypeDef]:
        """Resolve a dotted case path like ("Expr", "Lit", "Int_")."""
        tmap = self.type_map()
        if not path or path[0] not in tmap:
            return None
        node: TypeDef = tmap[path[0]]
        for part in path[1:]:
            if not isinstance(node, Sum):
                return None
            nxt = None
            for cname, cdef in node.cases:
                if cname == part:
                    nxt = cdef
                    break
            if nxt is None:
                return None
            node = nxt
        return node


# ---------------------------------------------------------------------------
# Parsing

_PUNCT = ["{", "}", "[", "]", ";", ":", ",", "?"]


def _scan_data(source: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        loc = Loc(line, col)
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(("id", source[i:j], loc))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(("punct", ch, loc))
            col += 1
            i += 1
            continue
        raise SpecError("unexpected character %r in .data source" % ch, loc)
    toks.append(("eof", "", Loc(line, col)))
    return toks


class _DataParser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        if t[0] != "eof":
            self.pos += 1
        return t

    def expect(self, kind, text=None):
        t = self.peek()
        if t[0] != kind or (text is not None and t[1] != text):
            raise SpecError("expected %r, found %r" % (text or kind, t[1] or "<eof>"), t[2])
        return self.next()

    def parse(self) -> DatatypeSchema:
        types = []
        params = []
        while self.peek()[0] != "eof":
            t = self.expect("id")
            if t[1] != "data":
                raise SpecError("expected 'data', found %r" % t[1], t[2])
            name = self.expect("id")[1]
            ps: List[str] = []
            if self.peek()[:2] == ("punct", "["):
                self.next()
                ps.append(self.expect("id")[1])
                while self.peek()[:2] == ("punct", ","):
                    self.next()
                    ps.append(self.expect("id")[1])
                self.expect("punct", "]")
            body = self.parse_body(name)
            types.append((name, body))
            params.append((name, tuple(ps)))
        return DatatypeSchema(tuple(types), tuple(params))

    def parse_body(self, ctx_name) -> TypeDef:
        self.expect("punct", "{")
        fields: List[Tuple[str, TypeExpr]] = []
        cases: List[Tuple[str, TypeDef]] = []
        while self.peek()[:2] != ("punct", "}"):
            t = self.expect("id")
            nxt = self.peek()
            if nxt[:2] == ("punct", ";"):
                self.next()
                cases.append((t[1], Product(())))
            elif nxt[:2] == ("punct", "{"):
                cases.append((t[1], self.parse_body(ctx_name + "." + t[1])))
            elif nxt[:2] == ("punct", ":"):
                self.next()
                ty = self.parse_type()
                self.expect("punct", ";")
                fields.append((t[1], ty))
            else:
                raise SpecError("expected ';', '{' or ':' after %r" % t[1], nxt[2])
        self.expect("punct", "}")
        if fields and cases:
            raise SpecError("type %s mixes fields and cases in one body" % ctx_name)
        if cases:
            return Sum(tuple(cases))
        return Product(tuple(fields))

    def parse_type(self) -> TypeExpr:
        t = self.peek()
        if t[:2] == ("punct", "["):
            self.next()
            elem = self.parse_type()
            self.expect("punct", "]")
            ty: TypeExpr = TSeq(elem)
        else:
            name = self.expect("id")[1]
            args: List[TypeExpr] = []
            if self.peek()[:2] == ("punct", "["):
                self.next()
                args.append(self.parse_type())
                while self.peek()[:2] == ("punct", ","):
                    self.next()
                    args.append(self.parse_type())
                self.expect("punct", "]")
            ty = TRef(name, tuple(args))
        while self.peek()[:2] == ("punct", "?"):
            self.next()
            ty = TOpt(ty)
        return ty


def _validate_schema(schema: DatatypeSchema):
    tmap = schema.type_map()
    if len(tmap) != len(schema.types):
        seen = set()
        for n, _ in schema.types:
            if n in seen:
                raise SpecError("duplicate type name %r" % n)
            seen.add(n)

    def check_texpr(te: TypeExpr, params, where):
        if isinstance(te, (TSeq, TOpt)):
            check_texpr(te.elem, params, where)
            return
        if te.name in params:
            if te.args:
                raise SpecError("type parameter %r cannot take arguments (%s)"
                                % (te.name, where))
            return
        if te.name in BUILTINS:
            if te.args:
                raise SpecError("builtin %r takes no arguments (%s)" % (te.name, where))
            return
        if te.name not in tmap:
            raise SpecError("unresolved type reference %r (%s)" % (te.name, where))
        want = len(schema.params_of(te.name))
        if len(te.args) != want:
            raise SpecError("type %r expects %d argument(s), got %d (%s)"
                            % (te.name, want, len(te.args), where))
        for a in te.args:
            check_texpr(a, params, where)

    def check_def(d: TypeDef, params, where):
        if isinstance(d, Product):
            seen = set()
            for fname, fty in d.fields:
                if fname in seen:
                    raise SpecError("duplicate field %r in %s" % (fname, where))
                seen.add(fname)
                check_texpr(fty, params, where + "." + fname)
        else:
            seen = set()
            for cname, cdef in d.cases:
                if cname in seen:
                    raise SpecError("duplicate case name %r in %s" % (cname, where))
                seen.add(cname)
                check_def(cdef, params, where + "." + cname)

    for name, d in schema.types:
        check_def(d, set(schema.params_of(name)), name)


def parse_data_spec(source: str) -> DatatypeSchema:
    schema = _DataParser(_scan_data(source)).parse()
    _validate_schema(schema)
    return schema


def render_type(te: TypeExpr) -> str:
    if isinstance(te, TSeq):
        return "[%s]" % render_type(te.elem)
    if isinstance(te, TOpt):
        return "%s?" % render_type(te.elem)
    if te.args:
        return "%s[%s]" % (te.name, ", ".join(render_type(a) for a in te.args))
    return te.name


def schema_render(schema: DatatypeSchema) -> str:
    """Canonical textual serialization; parse_data_spec(schema_render(s)) == s."""
    out: List[str] = []

    def emit_def(d: TypeDef, indent: int):
        pad = "    " * indent
        if isinstance(d, Product):
            for fname, fty in d.fields:
                out.append("%s%s: %s;" % (pad, fname, render_type(fty)))
        else:
            for cname, cdef in d.cases:
                if isinstance(cdef, Product) and not cdef.fields:
                    out.append("%s%s;" % (pad, cname))
                else:
                    out.append("%s%s {" % (pad, cname))
                    emit_def(cdef, indent + 1)
                    out.append("%s}" % pad)

    for name, d in schema.types:
        ps = schema.params_of(name)
        head = name if not ps else "%s[%s]" % (name, ", ".join(ps))
        out.append("data %s {" % head)
        emit_def(d, 1)
        out.append("}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Value layer

_HASH_COMPUTATIONS = 0


def hash_computation_count() -> int:
    """Instrumentation: how many SHA-256 digests have been computed so far."""
    return _HASH_COMPUTATIONS


class DataValue:
    """Immutable value of a schema type.

    `type_path` is the full case path (e.g. ("Expr", "Lit", "Int_")); plain
    products use the bare type name.  Field values are DataValue, int, str,
    bool, tuple (sequence), or None / value (option absent / present).
    Construct via make_value so fields are stored in schema order.
    """

    __slots__ = ("type_path", "fields", "_hash")

    def __init__(self, type_path: Tuple[str, ...], fields: Tuple[Tuple[str, object], ...]):
        object.__setattr__(self, "type_path", tuple(type_path))
        object.__setattr__(self, "fields", tuple(fields))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("DataValue is immutable")

    def field(self, name: str):
        for fname, v in self.fields:
            if fname == name:
                return v
        raise KeyError(name)

    def has_field(self, name: str) -> bool:
        return any(fname == name for fname, _ in self.fields)

    def __eq__(self, other):
        if not isinstance(other, DataValue):
            return NotImplemented
        return self.type_path == other.type_path and self.fields == other.fields

    def __hash__(self):
        return int.from_bytes(value_hash(self)[:8], "big")

    def __repr__(self):
        return "DataValue(%s)" % debug_print(self)


def make_value(schema: DatatypeSchema, path, fields: Optional[dict] = None) -> DataValue:
    """Build and shape-check a value of the case at `path` (dotted or tuple)."""
    if isinstance(path, str):
        path = tuple(path.split("::")) if "::" in path else tuple(path.split("."))
    d = schema.resolve_path(tuple(path))
    if d is None:
        raise SpecError("unknown type path %s" % "::".join(path))
    if isinstance(d, Sum):
        raise SpecError("%s is a sum type; construct one of its cases" % "::".join(path))
    fields = dict(fields or {})
    bindings = {p: None for p in schema.params_of(path[0])}
    ordered = []
    for fname, fty in d.fields:
        if fname not in fields:
            raise SpecError("missing field %r for %s" % (fname, "::".join(path)))
        v = fields.pop(fname)
        _check_field(schema, fty, v, bindings, "%s.%s" % ("::".join(path), fname))
        ordered.append((fname, v))
    if fields:
        raise SpecError("unknown field(s) %s for %s"
                        % (", ".join(sorted(fields)), "::".join(path)))
    return DataValue(tuple(path), tuple(ordered))


ANY_TYPE = TRef("__any")


def _subst(te: TypeExpr, bindings) -> TypeExpr:
    if isinstance(te, TOpt):
        return TOpt(_subst(te.elem, bindings))
    if isinstance(te, TSeq):
        return TSeq(_subst(te.elem, bindings))
    if te.name in bindings:
        bound = bindings[te.name]
        return bound if bound is not None else ANY_TYPE
    if te.args:
        return TRef(te.name, tuple(_subst(a, bindings) for a in te.args))
    return te


def _check_field(schema, te: TypeExpr, v, bindings, where):
    if isinstance(te, TOpt):
        if v is None:
            return
        _check_field(schema, te.elem, v, bindings, where)
        return
    if isinstance(te, TSeq):
        if not isinstance(v, tuple):
            raise SpecError("%s: expected a tuple sequence" % where)
        for i, item in enumerate(v):
            _check_field(schema, te.elem, item, bindings, "%s[%d]" % (where, i))
        return
    name = te.name
    if name == "__any":
        return  # unbound type parameter: checked at instantiation sites
    if name in bindings:
        bound = bindings[name]
        if bound is not None:
            _check_field(schema, bound, v, {}, where)
        return
    if name == "integer":
        if not isinstance(v, int) or isinstance(v, bool):
            raise SpecError("%s: expected integer, got %r" % (where, v))
        return
    if name == "string":
        if not isinstance(v, str):
            raise SpecError("%s: expected string, got %r" % (where, v))
        return
    if name == "boolean":
        if not isinstance(v, bool):
            raise SpecError("%s: expected boolean, got %r" % (where, v))
        return
    if not isinstance(v, DataValue):
        raise SpecError("%s: expected a %s value, got %r" % (where, name, v))
    if v.type_path[0] != name:
        raise SpecError("%s: expected %s, got %s" % (where, name, v.type_path[0]))
    params = schema.params_of(name)
    if params:
        args = tuple(_subst(a, bindings) for a in te.args)
        conforms(schema, v, bindings=dict(zip(params, args)))
    else:
        conforms(schema, v)


def conforms(schema: DatatypeSchema, v: DataValue, bindings: Optional[dict] = None):
    """Check that v's shape matches the schema; raises SpecError if not.

    For parameterized types, pass bindings like {"T": TRef("integer")} to
    check a particular instantiation; unbound parameters are wildcards.
    """
    d = schema.resolve_path(v.type_path)
    if d is None:
        raise SpecError("unknown type path %s" % "::".join(v.type_path))
    if isinstance(d, Sum):
        raise SpecError("%s is not a concrete case" % "::".join(v.type_path))
    bindings = dict(bindings or {})
    for p in schema.params_of(v.type_path[0]):
        bindings.setdefault(p, None)
    declared = [f for f, _ in d.fields]
    actual = [f for f, _ in v.fields]
    if declared != actual:
        raise SpecError("fields of %s are %s, expected %s"
                        % ("::".join(v.type_path), actual, declared))
    for (fname, fty), (_, fv) in zip(d.fields, v.fields):
        _check_field(schema, fty, fv, bindings,
                     "%s.%s" % ("::".join(v.type_path), fname))
    return True


def downcast(schema: DatatypeSchema, v: DataValue, case_path) -> Optional[DataValue]:
    """View v as the given case; present iff the case path prefixes v's path."""
    if isinstance(case_path, str):
        case_path = tuple(case_path.split("::"))
    case_path = tuple(case_path)
    if schema.resolve_path(case_path) is None:
        raise SpecError("unknown case path %s" % "::".join(case_path))
    if v.type_path[:len(case_path)] == case_path:
        return v
    return None


def substitute_field(schema: DatatypeSchema, v: DataValue, name: str, new) -> DataValue:
    """Copy of v with one field replaced; v itself is untouched."""
    d = schema.resolve_path(v.type_path)
    if d is None or isinstance(d, Sum):
        raise SpecError("cannot substitute into %s" % "::".join(v.type_path))
    fty = None
    for fname, t in d.fields:
        if fname == name:
            fty = t
            break
    if fty is None:
        raise SpecError("no field %r in %s" % (name, "::".join(v.type_path)))
    bindings = {p: None for p in schema.params_of(v.type_path[0])}
    _check_field(schema, fty, new, bindings, "%s.%s" % ("::".join(v.type_path), name))
    fields = tuple((fname, new if fname == name else old) for fname, old in v.fields)
    return DataValue(v.type_path, fields)


# ---------------------------------------------------------------------------
# Debug printing

def _print_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return '"%s"' % v.replace("\\", "\\\\").replace('"', '\\"')
    raise TypeError(v)


def _print_field(v) -> str:
    if isinstance(v, DataValue):
        return debug_print(v)
    if isinstance(v, tuple):
        return "[%s]" % ", ".join(_print_field(x) for x in v)
    if v is None:
        return "none"
    return _print_scalar(v)


def debug_print(v: DataValue) -> str:
    """Deterministic rendering; injective on schema-conforming values."""
    head = "::".join(v.type_path)
    if not v.fields:
        return head
    return "%s(%s)" % (head, ", ".join("%s: %s" % (f, _print_field(x))
                                       for f, x in v.fields))


# ---------------------------------------------------------------------------
# Hashing

def _u32(n: int) -> bytes:
    return struct.pack(">I", n)


def _ser_field(v, out: List[bytes]):
    if isinstance(v, DataValue):
        out.append(b"D")
        out.append(value_hash(v))
    elif isinstance(v, bool):
        out.append(b"B" + (b"\x01" if v else b"\x00"))
    elif isinstance(v, int):
        dec = str(v).encode("ascii")
        out.append(b"I" + _u32(len(dec)) + dec)
    elif isinstance(v, str):
        data = v.encode("utf-8")
        out.append(b"S" + _u32(len(data)) + data)
    elif isinstance(v, tuple):
        out.append(b"L" + _u32(len(v)))
        for item in v:
            _ser_field(item, out)
    elif v is None:
        out.append(b"N")
    else:
        raise TypeError(v)


def value_hash(v: DataValue) -> bytes:
    """32-byte SHA-256 over the canonical serialization, memoized per node.

    Nested values contribute their own digests, so the cache composes and
    equal structures hash equal across runs and processes.
    """
    cached = v._hash
    if cached is not None:
        return cached
    global _HASH_COMPUTATIONS
    _HASH_COMPUTATIONS += 1
    path = "::".join(v.type_path).encode("utf-8")
    out: List[bytes] = [b"V", _u32(len(path)), path]
    for fname, fv in v.fields:
        fname_b = fname.encode("utf-8")
        out.append(_u32(len(fname_b)))
        out.append(fname_b)
        _ser_field(fv, out)
    digest = hashlib.sha256(b"".join(out)).digest()
    object.__setattr__(v, "_hash", digest)
    return digest
