"""Decision for complete Boolean instances whose clauses stay nontrivial
after fixing any k-2 of their variables (induced-2 instances).

Guess the values of one (k-2)-tuple, project every clause through it onto a
pair of the remaining variables, and solve the resulting complete 2-CSP.
Clauses that avoid the guessed tuple are not captured by the projection, so
every solution of the projected 2-CSP (there are at most m+1 of them) is
checked against the full instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import AlgoMismatch, NotInduced2, TrivialPredicate
from .instance import Instance, validate_complete
from .twocsp import TwoCspView, enumerate_2csp


@dataclass(frozen=True)
class SymmetricSpec:
    k: int
    S: frozenset

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        if not self.S <= set(range(self.k + 1)):
            raise ValueError(f"accepted counts {sorted(self.S)} outside 0..{self.k}")
        if len(self.S) == self.k + 1:
            raise TrivialPredicate(f"S={sorted(self.S)} accepts every tuple")
        if not self.S:
            raise ValueError("S is empty: the predicate rejects every tuple")

    def unsat_tuples(self, signs=None) -> frozenset:
        signs = signs or (0,) * self.k
        return frozenset(t for t in itertools.product((0, 1), repeat=self.k)
                         if sum(a ^ s for a, s in zip(t, signs)) not in self.S)

    @property
    def induced2(self) -> bool:
        """No window of three consecutive counts lies inside S."""
        return all(not {c, c + 1, c + 2} <= self.S for c in range(self.k - 1))


def build_symmetric_instance(n: int, spec: SymmetricSpec, signs=None) -> Instance:
    """``signs`` maps a clause key to a 0/1 flip vector; missing keys are unsigned."""
    if n < spec.k:
        raise ValueError(f"need n >= k, got n={n} k={spec.k}")
    signs = signs or {}
    return Instance(spec.k, 2, n, {
        key: spec.unsat_tuples(signs.get(key))
        for key in itertools.combinations(range(n), spec.k)})


def induced2_specs(k: int) -> list[SymmetricSpec]:
    """Every symmetric Boolean predicate of arity k with the induced-2 property."""
    out = []
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k + 1), size):
            spec = SymmetricSpec(k, S)
            if spec.induced2:
                out.append(spec)
    return out


def random_induced2_instance(n: int, k: int, rng, planted=None) -> Instance:
    """Per-clause random induced-2 symmetric predicate with random signs.

    With ``planted``, signs are chosen so that the planted assignment's
    sign-adjusted count lands on a random accepted count of every clause.
    """
    specs = induced2_specs(k)
    clauses = {}
    for key in itertools.combinations(range(n), k):
        spec = specs[int(rng.integers(len(specs)))]
        if planted is None:
            signs = tuple(int(s) for s in rng.integers(0, 2, k))
        else:
            target = sorted(spec.S)[int(rng.integers(len(spec.S)))]
            ones = set(int(p) for p in rng.choice(k, size=target, replace=False))
            signs = tuple(int(planted[v]) ^ (p in ones) for p, v in enumerate(key))
        clauses[key] = spec.unsat_tuples(signs)
    return Instance(k, 2, n, clauses)


def is_induced2(inst: Instance) -> bool:
    k = inst.k
    if k < 2:
        return False
    for key, table in inst.clauses.items():
        for sub in itertools.combinations(range(k), k - 2):
            rest = [p for p in range(k) if p not in sub]
            for a in itertools.product((0, 1), repeat=k - 2):
                hit = False
                for x, y in itertools.product((0, 1), repeat=2):
                    t = [0] * k
                    for p, b in zip(sub, a):
                        t[p] = b
                    t[rest[0]], t[rest[1]] = x, y
                    if tuple(t) in table:
                        hit = True
                        break
                if not hit:
                    return False
    return True


def project_branch(inst: Instance, tup, a) -> Instance:
    """Complete 2-CSP on the variables outside ``tup`` (compacted, ascending)
    whose pair (i, j) forbids every (x, y) the clause on tup+{i, j} rejects."""
    tup = tuple(sorted(tup))
    others = [v for v in range(inst.n) if v not in tup]
    fixed = dict(zip(tup, a))
    clauses = {}
    for ci, cj in itertools.combinations(range(len(others)), 2):
        i, j = others[ci], others[cj]
        key = tuple(sorted(tup + (i, j)))
        table = inst.clauses[key]
        bad = set()
        for x, y in itertools.product((0, 1), repeat=2):
            vals = dict(fixed)
            vals[i], vals[j] = x, y
            if tuple(vals[v] for v in key) in table:
                bad.add((x, y))
        clauses[(ci, cj)] = frozenset(bad)
    return Instance(2, 2, len(others), clauses)


def decide_induced2(inst: Instance, check: bool = True):
    """(sat, witness or None). The witness is the first solution found in
    branch order (tuple values ascending, then the 2-CSP's lexicographic order)."""
    if inst.r != 2 or inst.side or any(len(s) != 2 for s in inst.label_sets):
        raise AlgoMismatch("induced-2 decision needs a plain Boolean instance")
    if check and not validate_complete(inst).ok:
        raise AlgoMismatch("instance is not complete")
    if not is_induced2(inst):
        raise NotInduced2("some clause becomes trivial after fixing k-2 of its variables")
    tup = tuple(range(inst.k - 2))
    others = [v for v in range(inst.n) if v not in tup]
    for a in itertools.product((0, 1), repeat=len(tup)):
        proj = project_branch(inst, tup, a)
        for sol in enumerate_2csp(TwoCspView.from_instance(proj)):
            full = [0] * inst.n
            for v, b in zip(tup, a):
                full[v] = b
            for v, b in zip(others, sol):
                full[v] = b
            if inst.satisfies(full):
                return True, tuple(full)
    return False, None
