#!/usr/bin/env python3
"""Self-hosting: the metalanguage is described in itself.

grammars/meta.lang is a .lang file defining the .lang syntax. Compiling it
yields a parser for .lang files; re-parsing meta.lang with that parser must
agree, structure for structure, with the hand-written bootstrap frontend.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

import langcc

GRAMMARS = pathlib.Path(__file__).resolve().parent.parent / "grammars"

if __name__ == "__main__":
    src = (GRAMMARS / "meta.lang").read_text()
    print("meta.lang:", len(src.splitlines()), "lines")

    result = langcc.compile_lang(src)
    print("compiled at k=%d, %d states, %d conflicts"
          % (result.k_used, len(result.tables.states), len(result.tables.conflicts)))

    ok, detail = langcc.bootstrap_check(src)
    print("bootstrap fixpoint:", ok, "(%s)" % detail)

    # the generated parser also fronts every other fixture grammar
    for name in ["calc.lang", "parens.lang", "sum_list.lang"]:
        other = (GRAMMARS / name).read_text()
        hand = langcc.parse_lang_spec(other)
        node = langcc.parse(result.compiled, other).result
        same = langcc.langspec_from_node(node) == hand
        print("generated parser agrees on %-14s %s" % (name, same))
