"""Permutation-avoiding colouring (PAC).

Every pair of vertices carries a partial matching of colour pairs it may not
take. Complete PAC(r, l) has matchings of size exactly l; over-complete
allows size >= l.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .csp23 import (EPSILON, EngineStats, LabelEngine, ReductionLedger,
                    two_csp_terminal)
from .errors import AlgoMismatch
from .instance import Instance, ValidationReport

COMPLETE = "complete"
OVER = "over"


@dataclass(frozen=True)
class PacInstance:
    n: int
    r: int
    l: int
    matchings: dict                      # (i, j) with i < j -> frozenset of (a, b)
    label_sets: tuple = None

    def __post_init__(self):
        full = frozenset(range(self.r))
        sets = (full,) * self.n if self.label_sets is None else tuple(
            frozenset(s) for s in self.label_sets)
        object.__setattr__(self, "label_sets", sets)
        object.__setattr__(self, "matchings", {
            tuple(key): frozenset(tuple(p) for p in pairs)
            for key, pairs in sorted(self.matchings.items())})


def validate_pac(p: PacInstance, mode: str = COMPLETE) -> ValidationReport:
    if mode not in (COMPLETE, OVER):
        raise ValueError(f"mode must be '{COMPLETE}' or '{OVER}', got {mode!r}")
    rep = ValidationReport()
    for key in itertools.combinations(range(p.n), 2):
        if key not in p.matchings:
            rep.add("MissingPair", key, "no matching on this pair")
    for key, pairs in p.matchings.items():
        left = [a for a, _ in pairs]
        right = [b for _, b in pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            rep.add("NotAMatching", key, "a colour appears twice on one side")
        if any(not (0 <= a < p.r and 0 <= b < p.r) for a, b in pairs):
            rep.add("NotAMatching", key, "colour outside the alphabet")
        size = len(pairs)
        if (mode == COMPLETE and size != p.l) or (mode == OVER and size < p.l):
            want = f"= {p.l}" if mode == COMPLETE else f">= {p.l}"
            rep.add("SizeViolation", key, f"matching has {size} pairs, need {want}")
    return rep


def pac_to_csp(p: PacInstance) -> Instance:
    return Instance(2, p.r, p.n, dict(p.matchings), p.label_sets)


def csp_to_pac(inst: Instance, l: int) -> PacInstance:
    if inst.k != 2 or inst.side:
        raise AlgoMismatch("only plain binary instances map to PAC")
    return PacInstance(inst.n, inst.r, l, dict(inst.clauses), inst.label_sets)


def identity_pac(n: int, r: int) -> PacInstance:
    """Every pair forbids equal colours: proper r-colouring of K_n."""
    same = frozenset((a, a) for a in range(r))
    return PacInstance(n, r, r, {key: same for key in itertools.combinations(range(n), 2)})


def random_pac(n: int, r: int, l: int, rng, mode: str = COMPLETE, planted=None,
               coherent: float = 0.0) -> PacInstance:
    """Random matchings per pair; with ``planted`` no matching contains the
    planted colour pair (needs l < r).

    With probability ``coherent`` a pair's matching is drawn from one fixed
    colour renaming per vertex (proper colouring up to renaming), which makes
    unsatisfiable instances common once n > r.
    """
    names = [rng.permutation(r) for _ in range(n)]
    matchings = {}
    for i, j in itertools.combinations(range(n), 2):
        size = l if mode == COMPLETE else int(rng.integers(l, r + 1))
        tied = rng.random() < coherent
        for attempt in itertools.count():
            tied = tied and attempt < 8
            if tied:
                perm = np.empty(r, dtype=int)
                perm[names[i]] = names[j]
            else:
                perm = rng.permutation(r)
            left = rng.choice(r, size=size, replace=False)
            pairs = frozenset((int(a), int(perm[a])) for a in left)
            if planted is None or (int(planted[i]), int(planted[j])) not in pairs:
                break
        matchings[i, j] = pairs
    return PacInstance(n, r, l, matchings)


@dataclass
class PacStats:
    outer: EngineStats = field(default_factory=EngineStats)
    inner: list = field(default_factory=list)
    guesses: int = 0


def _solve43(inst: Instance, label_sets, small_cutoff, epsilon, stats: PacStats):
    def check23(ledger):
        # terminal: no four-label vertex left; decide the width-3 system whose
        # two-label vertices ride along into the final 2-SAT calls
        if any(not s for s in ledger.label_sets):
            return None
        sub = EngineStats()
        stats.inner.append(sub)
        engine = LabelEngine(inst, 3, two_csp_terminal(inst), epsilon, small_cutoff, sub,
                             tables=outer.tables)
        return engine.run(ReductionLedger(ledger.label_sets, 3))

    outer = LabelEngine(inst, 4, check23, epsilon, small_cutoff, stats.outer)
    return outer.run(ReductionLedger(tuple(label_sets), 4))


def decide_pac43(p: PacInstance, *, small_cutoff=None, epsilon=EPSILON, stats=None,
                 check=True):
    """(sat, witness or None) for over-complete PAC(4,3)."""
    if p.r != 4:
        raise AlgoMismatch(f"PAC(4,3) decision needs r=4, got r={p.r}")
    if check:
        rep = validate_pac(PacInstance(p.n, p.r, 3, p.matchings, p.label_sets), OVER)
        if not rep.ok:
            raise AlgoMismatch("not an over-complete PAC(4,3): " + "; ".join(rep.lines()[:3]))
    stats = stats if stats is not None else PacStats()
    inst = pac_to_csp(p)
    if any(not s for s in inst.label_sets):
        return False, None
    witness = _solve43(inst, inst.label_sets, small_cutoff, epsilon, stats)
    if witness is None:
        return False, None
    assert inst.satisfies(witness), "engine returned a non-solution"
    return True, tuple(witness)


def pac55_branch_sets(p: PacInstance, v0: int, a: int) -> tuple:
    """Label sets after colouring ``v0`` with ``a``: every other vertex loses
    the single colour matched to ``a``."""
    sets = list(p.label_sets)
    sets[v0] = frozenset((a,))
    for u in range(p.n):
        if u == v0:
            continue
        key = (min(u, v0), max(u, v0))
        pairs = p.matchings[key]
        if v0 < u:
            drop = {b for x, b in pairs if x == a}
        else:
            drop = {x for x, b in pairs if b == a}
        sets[u] = sets[u] - drop
    return tuple(sets)


def decide_pac55(p: PacInstance, *, small_cutoff=None, epsilon=EPSILON, stats=None,
                 check=True):
    """(sat, witness or None) for complete PAC(5,5): guess vertex 0's colour,
    then solve the over-complete PAC(4,3) left on the other vertices."""
    if p.r != 5 or p.l != 5:
        raise AlgoMismatch(f"PAC(5,5) decision needs r=l=5, got r={p.r} l={p.l}")
    if check:
        rep = validate_pac(p, COMPLETE)
        if not rep.ok:
            raise AlgoMismatch("not a complete PAC(5,5): " + "; ".join(rep.lines()[:3]))
    stats = stats if stats is not None else PacStats()
    inst = pac_to_csp(p)
    if p.n == 0:
        return True, ()
    v0 = 0
    for a in sorted(p.label_sets[v0]):
        stats.guesses += 1
        sets = pac55_branch_sets(p, v0, a)
        if any(not s for s in sets):
            continue
        witness = _solve43(inst, sets, small_cutoff, epsilon, stats)
        if witness is not None:
            assert inst.satisfies(witness), "engine returned a non-solution"
            return True, tuple(witness)
    return False, None
