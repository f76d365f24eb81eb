"""Conflict exemplars: shortest "confusing input pairs".

For a conflict site (state, lookahead, competing actions) we search the
automaton for the shortest viable prefix reaching the state (weighted by the
shortest sentence each grammar symbol can derive), expand each prefix symbol
to a concrete terminal exemplar, and then search forward for the shortest
completion under each competing action.  The rendered report shows the
symbol derivation next to the concrete tokens, the two actions, and one
completion per action, sharing the conflict lookahead.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .grammar import Cfg, Inst
from .lexer import EOF_TERMINAL
from .lr import ConflictSite, LrTables


class SearchBudgetExceeded(Exception):
    def __init__(self, site: ConflictSite, partial):
        self.site = site
        self.partial = partial
        super().__init__("conflict trace budget exceeded in state %d" % site.state)


@dataclass
class ConflictExemplar:
    context: Optional[str]  # nonterminal entered by RecurStep, if any
    prefix_symbols: List[str]
    prefix_terminals: List[str]
    action_left: str
    action_right: str
    lookahead: Tuple[str, ...]
    completion_left: List[str]
    completion_right: List[str]
    budget_exceeded: bool = False
    state: int = -1


# ---------------------------------------------------------------------------
# Shortest sentences per instance

def _min_sentences(tables: LrTables) -> Dict[Inst, Tuple[str, ...]]:
    best: Dict[Inst, Tuple[str, ...]] = {}

    def cand_key(words):
        return (len(words), words)

    changed = True
    while changed:
        changed = False
        for ip in tables.ig.iprods:
            words: List[str] = []
            ok = True
            for sym in ip.rhs:
                if sym[0] == "t":
                    words.append(sym[1])
                else:
                    sub = best.get(sym[1])
                    if sub is None:
                        ok = False
                        break
                    words.extend(sub)
            if not ok:
                continue
            tup = tuple(words)
            cur = best.get(ip.lhs)
            if cur is None or cand_key(tup) < cand_key(cur):
                best[ip.lhs] = tup
                changed = True
    return best


# ---------------------------------------------------------------------------
# Shortest viable prefix to a state

def _shortest_paths(tables: LrTables, sentences):
    """Dijkstra over goto edges from every start (and sub-start) state.

    Returns per-state (cost, path) where path is a list of (key, from_state)
    edges and cost is (terminal count, symbol count, display tuple).
    """
    edges: Dict[int, List[Tuple[object, int]]] = {}
    for (state, key), target in tables.goto.items():
        edges.setdefault(state, []).append((key, target))
    for lst in edges.values():
        lst.sort(key=lambda e: _edge_display(e[0]))

    INF = (1 << 60, 0, ())
    dist: Dict[int, tuple] = {}
    back: Dict[int, Tuple[int, object]] = {}
    source_ctx: Dict[int, Optional[str]] = {}
    heap = []
    counter = 0
    for m, s in sorted(tables.starts.items()):
        dist[s] = (0, 0, ())
        source_ctx[s] = None
        heapq.heappush(heap, ((0, 0, ()), counter, s))
        counter += 1
    for inst, s in sorted(tables.substarts.items(), key=lambda kv: kv[0].mangled()):
        if s not in dist:
            dist[s] = (0, 0, ())
            source_ctx[s] = inst.base
            heapq.heappush(heap, ((0, 0, ()), counter, s))
            counter += 1

    while heap:
        d, _c, state = heapq.heappop(heap)
        if dist.get(state, INF) < d:
            continue
        for key, target in edges.get(state, ()):
            w = _edge_weight(key, sentences)
            if w is None:
                continue
            nd = (d[0] + w, d[1] + 1, d[2] + (_edge_display(key),))
            if nd < dist.get(target, INF):
                dist[target] = nd
                back[target] = (state, key)
                source_ctx[target] = source_ctx[state]
                heapq.heappush(heap, (nd, counter, target))
                counter += 1
    return dist, back, source_ctx


def _edge_weight(key, sentences) -> Optional[int]:
    if isinstance(key, tuple) and key[0] == "t":
        return 1
    sent = sentences.get(key)
    return None if sent is None else len(sent)


def _edge_display(key) -> str:
    if isinstance(key, tuple) and key[0] == "t":
        return key[1]
    return key.base


# ---------------------------------------------------------------------------
# Completion search

def _apply_reduce(tables, stack: tuple, pi: int) -> Optional[tuple]:
    prod = tables.prods[pi]
    n = len(prod["rhs"])
    if len(stack) <= n:
        return None
    rest = stack[: len(stack) - n]
    key = prod["lhs"]
    target = tables.goto.get((rest[-1], key))
    if target is None:
        return None
    return rest + (target,)


def _step(tables, stack: tuple, la: tuple, act: tuple):
    """Apply one action; returns (new_stack, consumed_one_token, accepted)."""
    tag = act[0]
    if tag == "shift":
        return (stack + (act[1],), True, False)
    if tag == "reduce":
        ns = _apply_reduce(tables, stack, act[1])
        return (ns, False, False) if ns is not None else (None, False, False)
    if tag == "accept":
        return (stack, False, True)
    if tag == "recur":
        return (stack + (act[2],), False, False)
    if tag == "ret":
        if len(stack) < 3:
            return (None, False, False)
        rest = stack[:-2]
        target = tables.goto.get((rest[-1], act[1]))
        if target is None:
            return (None, False, False)
        return (rest + (target,), False, False)
    raise AssertionError(act)


def _complete(tables: LrTables, stack: tuple, queue: tuple, budget: int,
              terminals: List[str]) -> Optional[List[str]]:
    """Shortest terminal suffix driving the configuration to Accept.

    `queue` holds committed upcoming terminals (the conflict lookahead);
    the returned list is queue plus whatever was appended, $ padding removed.
    """
    k = tables.k
    heap = []
    counter = 0
    start = (stack, queue)
    heapq.heappush(heap, (0, (), counter, start))
    counter += 1
    seen = set()
    popped = 0
    while heap:
        cost, appended, _c, (st, q) = heapq.heappop(heap)
        if (st, q) in seen:
            continue
        seen.add((st, q))
        popped += 1
        if popped > budget:
            return None
        if len(q) < k:
            if q and q[-1] == EOF_TERMINAL:
                choices = [EOF_TERMINAL]  # nothing follows end of input
            else:
                choices = list(terminals) + [EOF_TERMINAL]
            for t in choices:
                nq = q + (t,)
                c = cost + (0 if t == EOF_TERMINAL else 1)
                ap = appended if t == EOF_TERMINAL else appended + (t,)
                heapq.heappush(heap, (c, ap, counter, (st, nq)))
                counter += 1
            continue
        la = q[:k]
        for act in tables.actions_at(st[-1], la):
            ns, consumed, accepted = _step(tables, st, la, act)
            if accepted:
                return list(appended)
            if ns is None:
                continue
            nq = q[1:] if consumed else q
            heapq.heappush(heap, (cost, appended, counter, (ns, nq)))
            counter += 1
    return None


# ---------------------------------------------------------------------------
# Tracing

class _TraceContext:
    def __init__(self, tables: LrTables, cfg: Cfg):
        self.tables = tables
        self.cfg = cfg
        self.sentences = _min_sentences(tables)
        self.dist, self.back, self.source_ctx = _shortest_paths(tables, self.sentences)

    def path_keys(self, state: int):
        keys = []
        cur = state
        while cur in self.back:
            prev, key = self.back[cur]
            keys.append(key)
            cur = prev
        keys.reverse()
        return cur, keys

    def prefix_terminals(self, state: int) -> List[str]:
        _root, keys = self.path_keys(state)
        out = []
        for key in keys:
            if isinstance(key, tuple) and key[0] == "t":
                out.append(key[1])
            else:
                out.extend(self.sentences.get(key, ("?",)))
        return out


def trace_conflict(tables: LrTables, cfg: Cfg, site: ConflictSite,
                   budget: int = 100_000,
                   ctx: Optional[_TraceContext] = None) -> ConflictExemplar:
    ctx = ctx or _TraceContext(tables, cfg)
    if site.state not in ctx.dist:
        raise SearchBudgetExceeded(site, None)
    root, path_keys = ctx.path_keys(site.state)

    prefix_symbols = []
    prefix_terminals = []
    for key in path_keys:
        if isinstance(key, tuple) and key[0] == "t":
            prefix_symbols.append(key[1])
            prefix_terminals.append(key[1])
        else:
            disp = key.base
            if disp in cfg.synth_display:
                disp = "%s=%s" % (disp, cfg.synth_display[disp])
            prefix_symbols.append(disp)
            prefix_terminals.append(" ".join(ctx.sentences.get(key, ("?",))))

    # stack of states along the path, for the completion simulation
    stack = [root]
    for key in path_keys:
        stack.append(tables.goto[(stack[-1], key)])
    stack = tuple(stack)

    actions = list(site.actions[:2])
    terminals = sorted(t for t in cfg.terminals)
    completions = []
    exceeded = False
    for act in actions:
        ns, consumed, accepted = _step(tables, stack, site.lookahead, act)
        if accepted:
            completions.append([t for t in site.lookahead if t != EOF_TERMINAL])
            continue
        if ns is None:
            completions.append(["<unviable>"])
            continue
        queue = site.lookahead[1:] if consumed else site.lookahead
        suffix = _complete(tables, ns, queue, budget, terminals)
        if suffix is None:
            completions.append(["<budget exceeded>"])
            exceeded = True
        else:
            la_shown = [t for t in site.lookahead if t != EOF_TERMINAL]
            completions.append(la_shown + suffix)

    return ConflictExemplar(
        context=ctx.source_ctx.get(site.state),
        prefix_symbols=prefix_symbols,
        prefix_terminals=prefix_terminals,
        action_left=tables.display_action(actions[0]),
        action_right=tables.display_action(actions[1]) if len(actions) > 1 else "",
        lookahead=site.lookahead,
        completion_left=completions[0],
        completion_right=completions[1] if len(completions) > 1 else [],
        budget_exceeded=exceeded,
        state=site.state,
    )


def dedup_sites(tables: LrTables, cfg: Optional[Cfg] = None) -> List[ConflictSite]:
    """One representative site per distinct competing-action pair.

    Raw sites repeat per state and lookahead; rendered as exemplars that is
    noise, not information.  The earliest state (BFS numbering, so shortest
    access path) represents each group; among its lookaheads, one already
    occurring in the access prefix reads best (id `+` id with lookahead `+`),
    falling back to the smallest."""
    by_pair: Dict[tuple, List[ConflictSite]] = {}
    for site in tables.conflicts:
        key = tuple(tables.display_action(a) for a in site.actions)
        by_pair.setdefault(key, []).append(site)
    ctx = _TraceContext(tables, cfg) if cfg is not None else None
    out = []
    for key in sorted(by_pair):
        sites = by_pair[key]
        state = min(s.state for s in sites)
        candidates = sorted((s.lookahead, s) for s in sites if s.state == state)
        chosen = candidates[0][1]
        if ctx is not None and state in ctx.dist:
            prefix = set(ctx.prefix_terminals(state))
            for la, s in candidates:
                if la and la[0] in prefix:
                    chosen = s
                    break
        out.append(chosen)
    return out


def trace_all(tables: LrTables, cfg: Cfg, budget: int = 100_000) -> List[ConflictExemplar]:
    ctx = _TraceContext(tables, cfg)
    return [trace_conflict(tables, cfg, site, budget, ctx)
            for site in dedup_sites(tables, cfg)]


# ---------------------------------------------------------------------------
# Rendering

def render_conflict_report(exemplars: List[ConflictExemplar]) -> str:
    if not exemplars:
        return ""
    out: List[str] = []
    n = len(exemplars)
    for i, ex in enumerate(exemplars, 1):
        out.append("===== LR conflict %d of %d" % (i, n))
        out.append("")
        sym_rows = list(ex.prefix_symbols)
        term_rows = list(ex.prefix_terminals)
        if ex.context:
            sym_rows = ["&" + ex.context, ""] + sym_rows
            term_rows = ["&" + ex.context, "RecurStep(%s)" % ex.context] + term_rows
        w1 = max([len(s) for s in sym_rows] + [4])
        w2 = max([len(t) for t in term_rows]
                 + [len(t) for t in ex.completion_left] + [4])
        for s, t in zip(sym_rows, term_rows):
            out.append(("%s    %s" % (s.rjust(w1), t.rjust(w2))).rstrip())
        out.append("")
        wa = w1 + 4 + w2
        out.append(("%s    %s" % (ex.action_left.rjust(wa), ex.action_right)).rstrip())
        out.append("")
        rows = max(len(ex.completion_left), len(ex.completion_right))
        for j in range(rows):
            left = ex.completion_left[j] if j < len(ex.completion_left) else ""
            right = ex.completion_right[j] if j < len(ex.completion_right) else ""
            out.append(("%s    %s" % (left.rjust(wa), right)).rstrip())
        if ex.budget_exceeded:
            out.append("")
            out.append("(completion search budget exceeded; trace is partial)")
        out.append("")
    return "\n".join(out)
