"""Enumeration of all satisfying assignments of complete Boolean k-CSPs.

The recursion keeps a partial assignment. At each node it either exhausts
the few remaining unfixed variables, or branches on every (k-1)-tuple of
unfixed variables and value vector that forces many other unfixed variables,
and finally builds a complete (k-1)-CSP from the most-forcing value vector of
every tuple and enumerates that recursively (down to 2-CSP).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlgoMismatch, DeadTuple
from .instance import UNFIXED, Instance, validate_complete
from .oracle import SolutionSet
from .twocsp import enumerate_complete_2csp

FREE = -1
DEAD = 2


@dataclass(frozen=True)
class BranchConfig:
    epsilon: float
    small_cutoff: int
    depth_cap: int

    @classmethod
    def default(cls, n: int, k: int, small_cutoff: int | None = None,
                epsilon: float | None = None) -> "BranchConfig":
        eps = 1 / 2 ** (k + 1) if epsilon is None else epsilon
        logn = math.log2(max(n, 2))
        if small_cutoff is None:
            small_cutoff = math.ceil(100 * logn)
        return cls(eps, max(1, small_cutoff), math.ceil(logn / eps))

    def branch_floor(self, k: int) -> int:
        """Smallest |V_U| at which the no-good-tuple step is sound.

        The most-forcing value vector scores at least (|V_U|-k+1)/2^(k-1),
        which must reach epsilon*|V_U|.
        """
        slack = 1 - self.epsilon * 2 ** (k - 1)
        if slack <= 0:
            raise ValueError(f"epsilon={self.epsilon} too large for k={k}")
        return math.ceil((k - 1) / slack)


@dataclass(frozen=True)
class FixedSet:
    tuple: tuple
    assignment: tuple
    members: tuple
    forced: dict


@dataclass
class KcspStats:
    nodes: int = 0
    memo_hits: int = 0
    max_depth: int = 0
    good_branches: int = 0
    residual_calls: int = 0
    exhaustive_leaves: int = 0
    depth_cap: int = 0
    sub: list = field(default_factory=list)


def _bits(code: int, width: int) -> tuple:
    return tuple((code >> (width - 1 - i)) & 1 for i in range(width))


def _completion_status(table, pos, a) -> int:
    """FREE, the single satisfying value, or DEAD for inserting u at ``pos``."""
    sat = [b for b in (0, 1) if (a[:pos] + (b,) + a[pos:]) not in table]
    if len(sat) == 2:
        return FREE
    return sat[0] if sat else DEAD


def fixed_set(inst: Instance, vU, tup, a) -> FixedSet:
    """Variables of ``vU`` outside ``tup`` whose value is forced once ``tup`` takes ``a``."""
    tup = tuple(sorted(tup))
    a = tuple(a)
    if not set(tup) <= set(vU):
        raise ValueError("tuple must lie inside the unfixed set")
    forced = {}
    for u in sorted(set(vU) - set(tup)):
        key = tuple(sorted(tup + (u,)))
        status = _completion_status(inst.clauses[key], key.index(u), a)
        if status == DEAD:
            raise DeadTuple(f"clause {key} has no satisfying value for variable {u}")
        if status != FREE:
            forced[u] = status
    return FixedSet(tup, a, tuple(sorted(forced)), forced)


def _forcing_table(inst: Instance) -> np.ndarray:
    k, n = inst.k, inst.n
    width = k - 1
    table = np.full((n,) * width + (n, 2 ** width), FREE, dtype=np.int8)
    for key, unsat in inst.clauses.items():
        for pos, u in enumerate(key):
            rest = key[:pos] + key[pos + 1:]
            for code in range(2 ** width):
                table[rest + (u, code)] = _completion_status(unsat, pos, _bits(code, width))
    return table


def _scores(inst: Instance, vU):
    """n_{v,a} and the restriction count for every (k-1)-subset of ``vU``,
    computed directly from the clauses."""
    width = inst.k - 1
    out = {}
    for tup in itertools.combinations(sorted(vU), width):
        counts = []
        for code in range(2 ** width):
            a = _bits(code, width)
            forced = restricted = 0
            for u in vU:
                if u in tup:
                    continue
                key = tuple(sorted(tup + (u,)))
                status = _completion_status(inst.clauses[key], key.index(u), a)
                if status != FREE:
                    restricted += 1
                    forced += status != DEAD
            counts.append((forced, restricted))
        out[tup] = counts
    return out


def build_residual_km1(inst: Instance, vU) -> Instance:
    """Complete (k-1)-CSP on ``vU`` forbidding, per (k-1)-tuple, the value
    vector that restricts the most other variables (ties: smallest vector).

    Residual variable ``i`` stands for ``sorted(vU)[i]``.
    """
    if inst.k < 3:
        raise ValueError("residual construction needs k >= 3")
    order = sorted(vU)
    pos = {v: i for i, v in enumerate(order)}
    width = inst.k - 1
    clauses = {}
    for tup, counts in _scores(inst, order).items():
        best = max(range(len(counts)), key=lambda c: (counts[c][1], -c))
        clauses[tuple(pos[v] for v in tup)] = frozenset([_bits(best, width)])
    return Instance(width, 2, len(order), clauses)


class _Enumerator:
    def __init__(self, inst: Instance, config: BranchConfig, cutoff_override, stats):
        self.inst = inst
        self.k = inst.k
        self.config = config
        self.cutoff_override = cutoff_override
        self.floor = config.branch_floor(inst.k)
        self.stats = stats
        self.table = _forcing_table(inst)
        self.found: set = set()
        self.seen: set = set()
        self.by_var = [[] for _ in range(inst.n)]
        for key, unsat in inst.clauses.items():
            for v in key:
                self.by_var[v].append((key, unsat))

    def consistent(self, alpha) -> bool:
        fixed = [v for v, a in enumerate(alpha) if a is not UNFIXED]
        for key in itertools.combinations(fixed, self.k):
            if tuple(alpha[v] for v in key) in self.inst.clauses[key]:
                return False
        return True

    def exhaust(self, alpha, free):
        vals = list(alpha)

        def dfs(i):
            if i == len(free):
                self.stats.exhaustive_leaves += 1
                self.found.add(tuple(vals))
                return
            u = free[i]
            for b in (0, 1):
                vals[u] = b
                ok = True
                for key, unsat in self.by_var[u]:
                    t = tuple(vals[v] for v in key)
                    if UNFIXED not in t and t in unsat:
                        ok = False
                        break
                if ok:
                    dfs(i + 1)
            vals[u] = UNFIXED

        dfs(0)

    def run(self, alpha, depth):
        if alpha in self.seen:
            self.stats.memo_hits += 1
            return
        self.seen.add(alpha)
        self.stats.nodes += 1
        self.stats.max_depth = max(self.stats.max_depth, depth)
        assert depth <= self.config.depth_cap + 1, "branching depth exceeded its cap"
        if not self.consistent(alpha):
            return
        free = [v for v, a in enumerate(alpha) if a is UNFIXED]
        m = len(free)
        if m <= max(self.config.small_cutoff, self.floor - 1):
            self.exhaust(alpha, free)
            return

        width = self.k - 1
        U = np.array(free)
        combos = np.array(list(itertools.combinations(free, width)))
        idx = tuple(combos[:, t][:, None] for t in range(width)) + (U[None, :],)
        sub = self.table[idx]                       # (tuples, |V_U|, 2^(k-1))
        forced = (sub == 0) | (sub == 1)
        dead = sub == DEAD
        nforced = forced.sum(axis=1)
        restricted = nforced + dead.sum(axis=1)
        good = ~dead.any(axis=1) & (nforced >= self.config.epsilon * m)

        for ci, code in zip(*np.nonzero(good)):
            self.stats.good_branches += 1
            nxt = list(alpha)
            for v, b in zip(combos[ci], _bits(int(code), width)):
                nxt[v] = b
            mask = forced[ci, :, code]
            for u, b in zip(U[mask], sub[ci, mask, code]):
                nxt[int(u)] = int(b)
            self.run(tuple(nxt), depth + 1)

        # no good tuple: forbid the most restricting vector of every tuple
        best = np.argmax(restricted, axis=1)   # first maximum = smallest vector
        pos = {v: i for i, v in enumerate(free)}
        clauses = {}
        for ci, code in enumerate(best):
            key = tuple(pos[int(v)] for v in combos[ci])
            clauses[key] = frozenset([_bits(int(code), width)])
        residual = Instance(width, 2, m, clauses)
        self.stats.residual_calls += 1
        if width == 2:
            candidates = enumerate_complete_2csp(residual).tuples()
        else:
            sub_stats = KcspStats()
            self.stats.sub.append(sub_stats)
            candidates = enumerate_kcsp(residual, small_cutoff=self.cutoff_override,
                                        stats=sub_stats, check=False).tuples()
        for cand in candidates:
            full = list(alpha)
            for v, b in zip(free, cand):
                full[v] = b
            if self.inst.satisfies(full):
                self.found.add(tuple(full))


def enumerate_kcsp(inst: Instance, config: BranchConfig | None = None, *,
                   small_cutoff: int | None = None, stats: KcspStats | None = None,
                   check: bool = True) -> SolutionSet:
    """All satisfying assignments of a complete Boolean k-CSP.

    ``small_cutoff`` overrides the default ``ceil(100 log2 n)`` exhaustion
    threshold (also for the nested lower-arity instances); at desk scale the
    default always exhausts, so small values are what exercise branching.
    """
    if inst.r != 2:
        raise AlgoMismatch(f"k-CSP enumeration needs a Boolean alphabet, got r={inst.r}")
    if check:
        rep = validate_complete(inst)
        if not rep.ok:
            raise AlgoMismatch("instance is not complete: " + "; ".join(rep.lines()[:3]))
    if any(len(s) != 2 for s in inst.label_sets) or inst.side:
        raise AlgoMismatch("k-CSP enumeration needs full label sets and no side constraints")
    if inst.k == 2:
        return enumerate_complete_2csp(inst)
    if config is None:
        config = BranchConfig.default(inst.n, inst.k, small_cutoff)
    if stats is None:
        stats = KcspStats()
    stats.depth_cap = config.depth_cap
    run = _Enumerator(inst, config, small_cutoff, stats)
    run.run((UNFIXED,) * inst.n, 0)
    return SolutionSet.of(run.found)


def enumerate_3sat(inst: Instance, *, small_cutoff: int | None = None,
                   stats: KcspStats | None = None) -> SolutionSet:
    """k=3 entry point; threshold |V_U|/16."""
    if inst.k != 3:
        raise AlgoMismatch(f"3-SAT entry point needs k=3, got k={inst.k}")
    config = BranchConfig.default(inst.n, 3, small_cutoff, epsilon=1 / 16)
    return enumerate_kcsp(inst, config, small_cutoff=small_cutoff, stats=stats)
