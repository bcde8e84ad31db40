"""Decision for complete binary CSPs over small alphabets by label-set reduction.

State is one label set per variable. Variables whose set still has the full
width (3 for (2,3)-CSP, 4 for the PAC(4,3) solver) are "unreduced". A step
either exhausts the few unreduced variables, branches on a label that
conflicts with many unreduced neighbours, or deletes from every unreduced
variable its most-conflicting label and hands the narrower system to the
next solver down (2-SAT for width 3, the width-3 engine for width 4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import AlgoMismatch, EmptyLabelSet
from .instance import Instance, validate_complete
from .twocsp import TwoCspView, decide_2csp

EPSILON = 1 / 100


@dataclass(frozen=True)
class ReductionLedger:
    label_sets: tuple
    width: int = 3

    @property
    def unreduced(self) -> list[int]:
        return [v for v, s in enumerate(self.label_sets) if len(s) >= self.width]

    @property
    def fixed(self) -> list[int]:
        return [v for v, s in enumerate(self.label_sets) if len(s) == 1]

    @classmethod
    def of(cls, inst: Instance, width: int = 3) -> "ReductionLedger":
        return cls(tuple(frozenset(s) for s in inst.label_sets), width)


@dataclass
class EngineStats:
    nodes: int = 0
    max_depth: int = 0
    good_branches: int = 0
    fallbacks: int = 0
    exhaustive_leaves: int = 0
    terminal_calls: int = 0
    completeness_checks: int = 0
    completeness_failures: int = 0
    depth_cap: int = 0
    inner: list = field(default_factory=list)


class _Tables:
    """Oriented UNSAT lookups: conflicts[(v, u)][a] = labels of u rejected with v=a."""

    def __init__(self, inst: Instance):
        if inst.k != 2:
            raise AlgoMismatch(f"label-set engine needs k=2, got k={inst.k}")
        self.inst = inst
        self.n = inst.n
        self.conflicts = {}
        for (i, j), table in inst.constraints():
            for a, b in table:
                self.conflicts.setdefault((i, j), {}).setdefault(a, set()).add(b)
                self.conflicts.setdefault((j, i), {}).setdefault(b, set()).add(a)

    def against(self, v, a, u, labels) -> frozenset:
        return frozenset(self.conflicts.get((v, u), {}).get(a, ())) & labels


def reduced_set_23(inst: Instance, v: int, a: int, label_sets=None, among=None,
                   _tables: _Tables | None = None) -> set:
    """Pairs (u, b) with b still allowed for u and (v=a, u=b) rejected.

    ``among`` limits u to a subset of variables (default: all u != v).
    """
    tables = _tables or _Tables(inst)
    sets = inst.label_sets if label_sets is None else label_sets
    if a not in sets[v]:
        raise ValueError(f"label {a} not allowed for variable {v}")
    pool = range(inst.n) if among is None else among
    return {(u, b) for u in pool if u != v for b in tables.against(v, a, u, sets[u])}


def fixing_count(pairs) -> int:
    return len({u for u, _ in pairs})


def reduce(ledger: ReductionLedger, inst: Instance, v: int, a: int,
           _tables: _Tables | None = None) -> ReductionLedger:
    tables = _tables or _Tables(inst)
    sets = list(ledger.label_sets)
    if a not in sets[v]:
        raise ValueError(f"label {a} not allowed for variable {v}")
    sets[v] = frozenset((a,))
    for u in range(inst.n):
        if u == v:
            continue
        drop = tables.against(v, a, u, sets[u])
        if drop:
            sets[u] = sets[u] - drop
            if not sets[u]:
                raise EmptyLabelSet(u)
    return ReductionLedger(tuple(sets), ledger.width)


def unreduced_complete(inst: Instance, ledger: ReductionLedger, _tables=None) -> bool:
    """Every pair of unreduced variables keeps a rejected pair within the current sets."""
    tables = _tables or _Tables(inst)
    sets = ledger.label_sets
    for v, u in itertools.combinations(ledger.unreduced, 2):
        if not any(tables.against(v, a, u, sets[u]) for a in sets[v]):
            return False
    return True


class LabelEngine:
    """One recursion level. ``terminal`` decides a state with no unreduced
    variables left and returns a witness or None."""

    def __init__(self, inst: Instance, width: int, terminal, epsilon=EPSILON,
                 small_cutoff=None, stats=None, check_completeness=False, tables=None):
        self.inst = inst
        self.width = width
        self.terminal = terminal
        self.epsilon = epsilon
        logn = math.log2(max(inst.n, 2))
        self.cutoff = math.ceil(100 * logn) if small_cutoff is None else max(1, small_cutoff)
        self.depth_cap = math.ceil(logn / epsilon)
        self.stats = stats if stats is not None else EngineStats()
        self.stats.depth_cap = self.depth_cap
        self.check_completeness = check_completeness
        self.tables = tables or _Tables(inst)
        self.failed: set = set()

    def _reduce(self, ledger, v, a):
        try:
            out = reduce(ledger, self.inst, v, a, self.tables)
        except EmptyLabelSet:
            return None
        if self.check_completeness:
            self.stats.completeness_checks += 1
            if not unreduced_complete(self.inst, out, self.tables):
                self.stats.completeness_failures += 1
        return out

    def counts(self, ledger, VU):
        sets = ledger.label_sets
        out = {}
        for v in VU:
            for a in sorted(sets[v]):
                out[v, a] = sum(1 for u in VU if u != v
                                and self.tables.against(v, a, u, sets[u]))
        return out

    def run(self, ledger: ReductionLedger, depth: int = 0):
        if ledger.label_sets in self.failed:
            return None
        self.stats.nodes += 1
        self.stats.max_depth = max(self.stats.max_depth, depth)
        assert depth <= self.depth_cap + 1, "branching depth exceeded its cap"
        got = self._step(ledger, depth)
        if got is None:
            self.failed.add(ledger.label_sets)
        return got

    def _step(self, ledger, depth):
        VU = ledger.unreduced
        m = len(VU)
        if m == 0:
            self.stats.terminal_calls += 1
            return self.terminal(ledger)
        if m <= self.cutoff or m < 2:
            return self._exhaust(ledger, VU)

        counts = self.counts(ledger, VU)
        for (v, a), cnt in counts.items():
            if cnt >= self.epsilon * m:
                self.stats.good_branches += 1
                nxt = self._reduce(ledger, v, a)
                if nxt is not None:
                    got = self.run(nxt, depth + 1)
                    if got is not None:
                        return got

        self.stats.fallbacks += 1
        sets = list(ledger.label_sets)
        for v in VU:
            labs = sorted(ledger.label_sets[v])
            best = max(labs, key=lambda a: (counts[v, a], -a))
            sets[v] = sets[v] - {best}
        self.stats.terminal_calls += 1
        return self.terminal(ReductionLedger(tuple(sets), self.width))

    def _exhaust(self, ledger, VU):
        def dfs(state, i):
            while i < len(VU) and len(state.label_sets[VU[i]]) < self.width:
                i += 1
            if i == len(VU):
                self.stats.exhaustive_leaves += 1
                self.stats.terminal_calls += 1
                return self.terminal(state)
            v = VU[i]
            for a in sorted(state.label_sets[v]):
                nxt = self._reduce(state, v, a)
                if nxt is not None:
                    got = dfs(nxt, i + 1)
                    if got is not None:
                        return got
            return None

        return dfs(ledger, 0)


def two_csp_terminal(inst: Instance):
    def terminal(ledger):
        view = TwoCspView.from_instance(inst, ledger.label_sets)
        sat, witness = decide_2csp(view)
        return witness if sat else None
    return terminal


def decide_23csp(inst: Instance, *, small_cutoff=None, epsilon=EPSILON, stats=None,
                 check_completeness=False, check=True):
    """(sat, witness or None) for a complete binary CSP over three labels."""
    if inst.k != 2 or inst.r != 3:
        raise AlgoMismatch(f"(2,3)-CSP decision needs k=2 r=3, got k={inst.k} r={inst.r}")
    if check:
        rep = validate_complete(inst)
        if not rep.ok:
            raise AlgoMismatch("instance is not complete: " + "; ".join(rep.lines()[:3]))
    if any(not s for s in inst.label_sets):
        return False, None
    engine = LabelEngine(inst, 3, two_csp_terminal(inst), epsilon, small_cutoff, stats,
                         check_completeness)
    witness = engine.run(ReductionLedger.of(inst, 3))
    if witness is None:
        return False, None
    assert inst.satisfies(witness), "engine returned a non-solution"
    return True, tuple(witness)
