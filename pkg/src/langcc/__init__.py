"""langcc: a parser-generator toolchain.

Compiles declarative `.lang` language specifications into lexer DFAs, LR(k)
parse tables, generic ASTs with source positions, and round-tripping
pretty-printers; explains LR conflicts with shortest confusing-input-pair
exemplars.  The companion datacc tool compiles `.data` algebraic datatype
specifications.
"""

from .bootstrap import bootstrap_check, langspec_from_node
from .compiled import CompiledLang, CompileResult, compile_lang
from .conflicts import (
    ConflictExemplar, render_conflict_report, trace_all, trace_conflict,
)
from .datacc import (
    DataValue, DatatypeSchema, conforms, debug_print, downcast, make_value,
    parse_data_spec, schema_render, substitute_field, value_hash,
)
from .grammar import (
    Cfg, derive_ast_schema, dump_grammar, expand_instances, lower_grammar,
    lower_precedence,
)
from .lexer import (
    CompiledLexer, LexAmbiguity, LexError, compile_lexer, lex,
    token_bounds_to_linecol,
)
from .lr import LrTables, build_lr, dump_lr, first_k, run_compile_tests
from .meta_frontend import parse_lang_spec, validate_spec
from .printer import pretty_print, roundtrip_check
from .runtime import (
    Node, ParseError, ParseResult, location_fmt_str, node_downcast, parse,
    render_node, validate_node,
)
from .spec_ast import LangSpec, SpecError, render_spec

__version__ = "0.1.0"

__all__ = [
    "CompiledLang", "CompileResult", "compile_lang",
    "ConflictExemplar", "trace_conflict", "trace_all", "render_conflict_report",
    "DataValue", "DatatypeSchema", "parse_data_spec", "schema_render",
    "make_value", "conforms", "downcast", "substitute_field", "debug_print",
    "value_hash",
    "Cfg", "lower_grammar", "lower_precedence", "derive_ast_schema",
    "expand_instances", "dump_grammar",
    "CompiledLexer", "LexAmbiguity", "LexError", "compile_lexer", "lex",
    "token_bounds_to_linecol",
    "LrTables", "build_lr", "first_k", "run_compile_tests", "dump_lr",
    "parse_lang_spec", "validate_spec", "LangSpec", "SpecError", "render_spec",
    "Node", "ParseError", "ParseResult", "parse", "node_downcast",
    "location_fmt_str", "render_node", "validate_node",
    "pretty_print", "roundtrip_check",
    "bootstrap_check", "langspec_from_node",
]
