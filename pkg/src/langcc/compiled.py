"""The deployable artifact: CompiledLang.

Flattens the compiled lexer, LR tables, assembly metadata, AST field kinds,
and print templates into plain dict/list structures.  Serialization is
canonical JSON (sorted keys, versioned), so artifacts are byte-identical
across runs and friendly to version control.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Optional

from .grammar import Cfg, lower_grammar, lower_precedence
from .lexer import CompiledLexer, ModeDfa, compile_lexer
from .lr import LrTables, build_lr
from .meta_frontend import parse_lang_spec
from .spec_ast import (
    AEmit, APass, APop, APopEmit, APopExtract, APush, LangSpec, SpecError,
)

FORMAT_VERSION = 1


def _untuple(x):
    """JSON round-trips tuples as lists; normalize kinds/templates to tuples."""
    if isinstance(x, list):
        return tuple(_untuple(i) for i in x)
    return x


class CompiledLang:
    """Runtime-facing compiled language: everything the parser, printer, and
    validators need, with no references back to build-time structures."""

    def __init__(self, data: dict):
        self.data = data
        self._build_indexes()

    def _build_indexes(self):
        d = self.data
        self.k = d["k"]
        self.rd = d["rd"]
        self.mains = list(d["mains"])
        self.digest = d["digest"]
        self.indent_unit = d["indent_unit"]
        self.action: Dict[tuple, tuple] = {}
        for state, la, act in d["action"]:
            self.action[(state, tuple(la))] = (_untuple(act),)
        self.goto: Dict[tuple, int] = {}
        for state, kind, ref, target in d["goto"]:
            self.goto[(state, (kind, ref))] = target
        self.starts = dict(d["starts"])
        self.prods = [_untuple(p) for p in d["prods"]]
        # prods entries:
        #   ("user", rhs_len, lhs_ref, variant_key, fields, display)
        #   ("enum" | "list_*" | "opt_*", rhs_len, lhs_ref, asm, display)
        #   ("ret", 1, lhs_ref)
        self.ast_fields: Dict[str, list] = {}
        for vk in sorted(d["ast"]):
            self.ast_fields[vk] = [(f[0], _untuple(f[1])) for f in d["ast"][vk]]
        self.print_templates = {vk: _untuple(tmpl)
                                for vk, tmpl in d["templates"].items()}
        self.variant_prefixes = set()
        for vk in self.ast_fields:
            parts = tuple(vk.split("::"))
            for i in range(1, len(parts) + 1):
                self.variant_prefixes.add(parts[:i])
        self.lexer = _lexer_from_json(d["lexer"])

    @property
    def default_start(self) -> str:
        return self.mains[0]

    def field_kind(self, variant_key: str, name: str):
        for fname, kind in self.ast_fields.get(variant_key, ()):
            if fname == name:
                return kind
        raise KeyError("%s.%s" % (variant_key, name))

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=1,
                          separators=(",", ": "), ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CompiledLang":
        data = json.loads(text)
        if data.get("version") != FORMAT_VERSION:
            raise SpecError("unsupported artifact version %r" % data.get("version"))
        return cls(data)

    def __eq__(self, other):
        return isinstance(other, CompiledLang) and self.to_json() == other.to_json()


# ---------------------------------------------------------------------------
# Lexer (de)serialization

def _action_to_json(a):
    if isinstance(a, AEmit):
        return ["emit"]
    if isinstance(a, APass):
        return ["pass"]
    if isinstance(a, APush):
        return ["push", a.mode]
    if isinstance(a, APop):
        return ["pop"]
    if isinstance(a, APopExtract):
        return ["pop_extract"]
    if isinstance(a, APopEmit):
        return ["pop_emit", a.token]
    raise TypeError(a)


def _action_from_json(j):
    tag = j[0]
    if tag == "emit":
        return AEmit()
    if tag == "pass":
        return APass()
    if tag == "push":
        return APush(j[1])
    if tag == "pop":
        return APop()
    if tag == "pop_extract":
        return APopExtract()
    if tag == "pop_emit":
        return APopEmit(j[1])
    raise ValueError(j)


def _lexer_to_json(lx: CompiledLexer) -> dict:
    modes = {}
    for name in sorted(lx.dfas):
        dfa = lx.dfas[name]
        states = []
        for transitions, eof_target, accept in dfa.states:
            states.append([
                [list(t) for t in transitions],
                eof_target,
                list(accept) if accept is not None else None,
            ])
        modes[name] = states
    actions = {m: [[_action_to_json(a) for a in rule] for rule in rules]
               for m, rules in lx.mode_actions.items()}
    return {"main_mode": lx.main_mode, "modes": modes, "actions": actions,
            "emittable": sorted(lx.emittable)}


def _lexer_from_json(d: dict) -> CompiledLexer:
    dfas = {}
    for name, states in d["modes"].items():
        rows = []
        for transitions, eof_target, accept in states:
            rows.append((tuple(tuple(t) for t in transitions), eof_target,
                         tuple(accept) if accept is not None else None))
        dfas[name] = ModeDfa(name, rows)
    actions = {m: tuple(tuple(_action_from_json(a) for a in rule) for rule in rules)
               for m, rules in d["actions"].items()}
    return CompiledLexer(d["main_mode"], dfas, actions, frozenset(d["emittable"]))


# ---------------------------------------------------------------------------
# Flattening build products into an artifact

def _decode_template(tmpl, lit_text):
    out = []
    for it in tmpl:
        if it[0] == "lit":
            out.append(["lit", lit_text(it[1])])
        elif it[0] == "verbatim":
            out.append(["verbatim", it[1]])
        elif it[0] == "content":
            out.append(["content"])
        else:
            raise AssertionError(it)
    return out


def _kind_to_json(kind, lit_text):
    tag = kind[0]
    if tag in ("token", "node"):
        return [tag, kind[1]]
    if tag == "seq":
        return ["seq", _kind_to_json(kind[1], lit_text),
                kind[2], _decode_template(kind[3], lit_text), kind[4], kind[5]]
    if tag == "opt":
        return ["opt", _kind_to_json(kind[1], lit_text),
                _decode_template(kind[2], lit_text), kind[3]]
    if tag == "bool":
        return ["bool", _decode_template(kind[1], lit_text)]
    if tag == "enum":
        return ["enum", [[label, _decode_template(t, lit_text)]
                         for label, t in kind[1]]]
    raise AssertionError(kind)


def flatten(spec: LangSpec, cfg: Cfg, lexer: CompiledLexer, tables: LrTables,
            digest: str) -> CompiledLang:
    from .meta_frontend import decode_backtick

    opaque = set(spec.opaque_names())

    def lit_text(term: str) -> str:
        if term in opaque:
            raise AssertionError("opaque token in a literal template: %r" % term)
        return decode_backtick(term)

    inst_index = {}

    def inst_ref(inst) -> str:
        if inst not in inst_index:
            inst_index[inst] = inst.mangled()
        return inst_index[inst]

    prods_json = []
    for p in tables.prods:
        if p["kind"] == "start":
            prods_json.append(["start", 1, p["main"]])
            continue
        if p["kind"] == "ret":
            prods_json.append(["ret", 1, inst_ref(p["lhs"])])
            continue
        base = p["iprod"].base
        lhs_ref = inst_ref(p["lhs"])
        display = tables.display_production(len(prods_json))
        if base.kind == "user":
            vk = "::".join((base.lhs,) + base.variant)
            fields = []
            for name, src in base.fields:
                if src[0] == "slot":
                    fields.append([name, ["slot", src[1]]])
                else:
                    _, idx, label, tmpl = src
                    fields.append([name, ["enum_inline", idx, label]])
            prods_json.append(["user", len(base.slots), lhs_ref, vk, fields, display])
        elif base.kind == "enum":
            prods_json.append(["enum", len(base.slots), lhs_ref,
                               [base.label], display])
        else:
            prods_json.append([base.kind, len(base.slots), lhs_ref,
                               list(base.asm), display])

    action_json = []
    for (state, la) in sorted(tables.action):
        acts = tables.action[(state, la)]
        if len(acts) != 1:
            raise SpecError("cannot flatten tables with conflicts")
        a = acts[0]
        if a[0] == "shift":
            aj = ["shift", a[1]]
        elif a[0] == "reduce":
            aj = ["reduce", a[1]]
        elif a[0] == "accept":
            aj = ["accept", a[1]]
        elif a[0] == "recur":
            aj = ["recur", inst_ref(a[1]), a[2]]
        elif a[0] == "ret":
            aj = ["ret", inst_ref(a[1])]
        else:
            raise AssertionError(a)
        action_json.append([state, list(la), aj])

    goto_json = []
    for (state, key) in sorted(tables.goto,
                               key=lambda sk: (sk[0], _goto_key_str(sk[1]))):
        target = tables.goto[(state, key)]
        if isinstance(key, tuple) and key[0] == "t":
            goto_json.append([state, "t", key[1], target])
        else:
            goto_json.append([state, "n", inst_ref(key), target])

    ast_json = {}
    templates_json = {}
    shape = cfg.ast_shape
    for nt in shape.variants:
        for path, fields in shape.variants[nt].items():
            vk = "::".join((nt,) + path)
            ast_json[vk] = [[name, _kind_to_json(kind, lit_text)]
                            for name, kind in fields]
    for p in cfg.productions:
        if p.kind != "user":
            continue
        vk = "::".join((p.lhs,) + p.variant)
        field_of_slot = {}
        for name, src in p.fields:
            if src[0] == "slot":
                field_of_slot[src[1]] = ("field", name)
            else:
                field_of_slot[src[1]] = ("field", name)
        items = []
        for it in p.template:
            if it[0] == "verbatim":
                items.append(["verbatim", it[1]])
            else:
                idx = it[1]
                if idx in field_of_slot:
                    items.append(["field", field_of_slot[idx][1]])
                else:
                    slot = p.slots[idx]
                    assert slot.is_terminal, "unbound nonterminal slot %r" % (slot,)
                    items.append(["lit", lit_text(slot.symbol)])
        templates_json[vk] = items

    data = {
        "version": FORMAT_VERSION,
        "digest": digest,
        "k": tables.k,
        "rd": tables.rd,
        "mains": list(cfg.mains),
        "indent_unit": 4,
        "terminals": sorted(cfg.terminals),
        "lexer": _lexer_to_json(lexer),
        "action": action_json,
        "goto": goto_json,
        "starts": {m: s for m, s in sorted(tables.starts.items())},
        "prods": prods_json,
        "ast": ast_json,
        "templates": templates_json,
    }
    return CompiledLang(data)


def _goto_key_str(key):
    if isinstance(key, tuple) and key and key[0] == "t":
        return "t:" + key[1]
    return "n:" + key.mangled()


# ---------------------------------------------------------------------------
# Compile pipeline

@dataclass
class CompileResult:
    ok: bool
    spec: LangSpec
    cfg: Optional[Cfg] = None
    lexer: Optional[CompiledLexer] = None
    tables: Optional[LrTables] = None
    k_used: Optional[int] = None
    compiled: Optional[CompiledLang] = None
    notices: Optional[List[str]] = None


def source_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def compile_lang(source: str, max_k: int = 2, rd: bool = False,
                 start_k: int = 1) -> CompileResult:
    """Full pipeline: frontend, lexer DFAs, lowering, LR(k) with k retry.

    On conflicts at every k up to max_k, returns ok=False with the tables of
    the first k attempted (their conflicts feed the exemplar tracer).
    """
    spec = parse_lang_spec(source)
    lexer = compile_lexer(spec)
    cfg, _shape = lower_grammar(spec)
    cfg = lower_precedence(spec, cfg)

    missing = sorted(t for t in cfg.terminals if t not in lexer.emittable)
    if missing:
        raise SpecError("parser uses terminal(s) the lexer never emits: %s"
                        % ", ".join(missing))

    first_tables = None
    for k in range(start_k, max_k + 1):
        tables = build_lr(cfg, k, rd=rd)
        if first_tables is None:
            first_tables = tables
        if not tables.conflicts:
            compiled = flatten(spec, cfg, lexer, tables, source_digest(source))
            return CompileResult(True, spec, cfg, lexer, tables, k,
                                 compiled, tables.notices)
    return CompileResult(False, spec, cfg, lexer, first_tables, start_k,
                         None, first_tables.notices if first_tables else [])
