"""Instance constructions: dense embedding of Min-k-SAT, the product blow-up to
complete instances, randomized hardness gadgets with exhaustive
verification, and CNF conversion for test corpora.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DistributionNotBalanced, GadgetNotFound, InstanceSyntaxError
from .instance import Instance, normalize_clause
from .oracle import _violations

GADGET_CAP = 2 ** 26


# -- general CNF -----------------------------------------------------------------

@dataclass(frozen=True)
class GeneralCnf:
    n: int
    k: int
    clauses: tuple          # DIMACS literal tuples, +v / -v with v 1-based

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            if any(l == 0 or abs(l) > self.n for l in c):
                raise ValueError(f"literal out of range in clause {c}")
            if any(-l in c for l in c):
                raise ValueError(f"tautological clause {c}")

    def unsat_count(self, assignment) -> int:
        return sum(1 for c in self.clauses
                   if not any((assignment[abs(l) - 1] == 1) == (l > 0) for l in c))

    def to_instance(self) -> Instance:
        """Boolean CSP with one constraint per variable set (UNSAT tuples merged).

        Every clause must mention exactly k distinct variables.
        """
        tables: dict = {}
        for c in self.clauses:
            vars_ = [abs(l) - 1 for l in c]
            if len(set(vars_)) != self.k:
                raise ValueError(f"clause {c} does not mention {self.k} distinct variables")
            key, table = normalize_clause(vars_, [tuple(0 if l > 0 else 1 for l in c)])
            tables.setdefault(key, set()).update(table)
        return Instance(self.k, 2, self.n, {k: frozenset(v) for k, v in tables.items()})

    def to_dimacs(self, comments=()) -> str:
        lines = [f"c {c}" for c in comments]
        lines.append(f"p cnf {self.n} {len(self.clauses)}")
        lines += [" ".join(str(l) for l in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text) -> GeneralCnf:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode()
    n = None
    clauses, current = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise InstanceSyntaxError("expected 'p cnf <n> <m>'", lineno)
            try:
                n = int(parts[2])
            except ValueError:
                raise InstanceSyntaxError("bad variable count", lineno) from None
            continue
        if n is None:
            raise InstanceSyntaxError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise InstanceSyntaxError(f"bad literal {tok!r}", lineno) from None
            if abs(lit) > n:
                raise InstanceSyntaxError(f"literal {lit} out of range", lineno)
            if lit == 0:
                if current:
                    clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if n is None:
        raise InstanceSyntaxError("missing 'p cnf' header")
    k = max((len(c) for c in clauses), default=1)
    try:
        return GeneralCnf(n, k, tuple(clauses))
    except ValueError as exc:
        raise InstanceSyntaxError(str(exc)) from None


def random_cnf(n: int, k: int, m: int, rng) -> GeneralCnf:
    clauses = []
    for _ in range(m):
        vars_ = rng.choice(n, size=k, replace=False) + 1
        signs = rng.choice([-1, 1], size=k)
        clauses.append(tuple(int(v * s) for v, s in zip(vars_, signs)))
    return GeneralCnf(n, k, tuple(clauses))


# -- dense embedding ----------------------------------------------------------------

def densify(cnf: GeneralCnf, eps: float) -> GeneralCnf:
    """Add ceil(n0/eps) dummy variables and an all-positive clause on every
    k-set that contains at least one dummy."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    extra = math.ceil(cnf.n / eps)
    total = cnf.n + extra
    clauses = list(cnf.clauses)
    for key in itertools.combinations(range(1, total + 1), cnf.k):
        if key[-1] > cnf.n:
            clauses.append(key)
    return GeneralCnf(total, cnf.k, tuple(clauses))


# -- product reduction ------------------------------------------------------------------

@dataclass(frozen=True)
class ProductResult:
    instance: Instance
    real_keys: frozenset
    p: float
    t: int
    n0: int

    def lift(self, assignment) -> tuple:
        """Blockwise extension: copy i of variable v takes v's value."""
        return tuple(int(assignment[v]) for v in range(self.n0) for _ in range(self.t))

    def real_cost(self, assignment) -> int:
        inst = self.instance
        return sum(1 for key in self.real_keys
                   if tuple(assignment[v] for v in key) in inst.clauses[key])


def single_tuple_distribution(k: int, r: int) -> list[tuple[float, frozenset]]:
    space = list(itertools.product(range(r), repeat=k))
    w = 1 / len(space)
    return [(w, frozenset([s])) for s in space]


def balance(dist, k: int, r: int) -> float:
    """The common probability that a fixed tuple is rejected; raises if it varies."""
    total = sum(w for w, _ in dist)
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise DistributionNotBalanced(f"weights sum to {total}, not 1")
    probs = {s: sum(w for w, table in dist if s in table)
             for s in itertools.product(range(r), repeat=k)}
    lo, hi = min(probs.values()), max(probs.values())
    if hi - lo > 1e-9 or not 0 < lo < 1:
        raise DistributionNotBalanced(f"rejection probability ranges over [{lo}, {hi}]")
    return lo


def product_reduction(source, t: int, seed: int = 0, dist=None, cap: int = 5_000_000
                      ) -> ProductResult:
    """Blow every variable up to t copies, replicate each source constraint on
    every copy tuple, and fill all other k-sets with predicates drawn from
    ``dist`` (a list of (weight, UNSAT table)). ``source`` is a GeneralCnf or
    an Instance with at most one constraint per variable set."""
    if isinstance(source, GeneralCnf):
        keys = [tuple(sorted(abs(l) - 1 for l in c)) for c in source.clauses]
        if len(set(keys)) != len(keys):
            raise ValueError("two source clauses share a variable set")
        source = source.to_instance()
    k, r, n0 = source.k, source.r, source.n
    if t < 1:
        raise ValueError("t must be positive")
    if math.comb(n0 * t, k) > cap:
        raise ValueError(f"C({n0 * t}, {k}) k-sets exceed the cap of {cap}")
    dist = single_tuple_distribution(k, r) if dist is None else list(dist)
    p = balance(dist, k, r)
    weights = np.array([w for w, _ in dist])
    weights = weights / weights.sum()

    clauses = {}
    for key, table in source.clauses.items():
        for copies in itertools.product(range(t), repeat=k):
            clauses[tuple(v * t + i for v, i in zip(key, copies))] = table
    real = frozenset(clauses)
    rng = np.random.default_rng(seed)
    for key in itertools.combinations(range(n0 * t), k):
        if key not in clauses:
            clauses[key] = dist[int(rng.choice(len(dist), p=weights))][1]
    return ProductResult(Instance(k, r, n0 * t, clauses), real, p, t, n0)


# -- 3-CNF to complete ----------------------------------------------------------------

def cnf_to_complete3sat(cnf: GeneralCnf) -> Instance:
    """Complete 3-CSP: triples of the CNF keep their UNSAT tuples, every other
    triple forbids (0, 0, 0). This adds constraints, so it changes the
    instance; it is meant for building test corpora only."""
    if cnf.k != 3:
        raise ValueError(f"need a 3-CNF, got k={cnf.k}")
    base = cnf.to_instance()
    zero = frozenset([(0, 0, 0)])
    clauses = {key: base.clauses.get(key, zero)
               for key in itertools.combinations(range(cnf.n), 3)}
    return Instance(3, 2, cnf.n, clauses)


# -- gadgets ---------------------------------------------------------------------------

KINDS = ("pac41", "sixpac", "csp33")


@dataclass
class Gadget:
    kind: str
    t: int
    instance: Instance
    blocks: dict                 # block name -> tuple of variables
    sigma: tuple | None = None
    properties: dict = field(default_factory=dict)
    verified: bool = False
    tries: int = 0
    satisfying: int = 0


def _pair_gadget(kind: str, t: int, rng) -> Gadget:
    U = tuple(range(t))
    V = tuple(range(t, 2 * t))
    clauses = {}
    if kind == "pac41":
        for i, j in itertools.product(range(t), repeat=2):
            p = int(rng.integers(4))
            clauses[U[i], V[j]] = frozenset([(p, p)])
        for i, j in itertools.combinations(range(t), 2):
            if rng.random() < 0.5:
                p, q = (int(x) for x in rng.choice(3, size=2, replace=False))
                table = frozenset([(p, q)])
            else:
                table = frozenset([(3, 3)])
            clauses[U[i], U[j]] = table
            clauses[V[i], V[j]] = table
        r = 4
    else:
        same = frozenset((a, a) for a in range(6))
        for i, j in itertools.product(range(t), repeat=2):
            clauses[U[i], V[j]] = same
        derangements = [d for d in itertools.permutations(range(3))
                        if all(d[x] != x for x in range(3))]
        for i, j in itertools.combinations(range(t), 2):
            a, b, c = derangements[int(rng.integers(len(derangements)))]
            table = frozenset([(0, a), (1, b), (2, c), (3, 3), (4, 4), (5, 5)])
            clauses[U[i], U[j]] = table
            clauses[V[i], V[j]] = table
        r = 6
    return Gadget(kind, t, Instance(2, r, 2 * t, clauses), {"U": U, "V": V})


def _csp33_gadget(t: int, sigma, rng) -> Gadget:
    U, V, W = (tuple(range(b * t, (b + 1) * t)) for b in range(3))
    clauses = {}
    for i, j, k in itertools.product(range(t), repeat=3):
        clauses[U[i], V[j], W[k]] = frozenset([tuple(sigma)])
    for trip in itertools.combinations(range(t), 3):
        if rng.random() < 0.5:
            p, q = int(rng.integers(3)), int(rng.integers(2))
            tup = tuple(q if x == p else 1 - q for x in range(3))
            table = frozenset([tup])
        else:
            table = frozenset([(2, 2, 2)])
        for block in (U, V, W):
            clauses[tuple(block[x] for x in trip)] = table
    return Gadget("csp33", t, Instance(3, 3, 3 * t, clauses), {"U": U, "V": V, "W": W},
                  tuple(sigma))


def sample_gadget(kind: str, t: int, rng, sigma=(0, 0, 0)) -> Gadget:
    if kind not in KINDS:
        raise ValueError(f"unknown gadget kind {kind!r}")
    if t < 1:
        raise ValueError("t must be positive")
    if kind == "csp33":
        return _csp33_gadget(t, sigma, rng)
    return _pair_gadget(kind, t, rng)


def _block_solutions(inst: Instance, block) -> np.ndarray:
    """All assignments of one block that satisfy the constraints inside it."""
    inside = {key: table for key, table in inst.clauses.items() if set(key) <= set(block)}
    pos = {v: i for i, v in enumerate(block)}
    local = Instance(inst.k, inst.r, len(block),
                     {tuple(pos[v] for v in key): table for key, table in inside.items()})
    rows = np.array(list(itertools.product(range(inst.r), repeat=len(block))), dtype=np.int64)
    if len(rows) == 0:
        return rows
    return rows[_violations(local, rows) == 0]


def gadget_solutions(g: Gadget, cap: int = GADGET_CAP) -> np.ndarray:
    """Every satisfying assignment of the gadget (rows over all its variables)."""
    inst = g.instance
    if inst.r ** inst.n > cap:
        raise ValueError(f"{inst.r}^{inst.n} assignments exceed the cap of {cap}")
    blocks = list(g.blocks.values())
    parts = [_block_solutions(inst, b) for b in blocks]
    cross = Instance(inst.k, inst.r, inst.n, {
        key: table for key, table in inst.clauses.items()
        if not any(set(key) <= set(b) for b in blocks)})
    order = np.concatenate([np.array(b) for b in blocks])
    found = []
    sizes = [len(p) for p in parts]
    if 0 in sizes:
        return np.zeros((0, inst.n), dtype=np.int64)
    total = math.prod(sizes)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        rows = np.empty((len(idx), inst.n), dtype=np.int64)
        rest = idx
        cols = []
        for p, size in zip(reversed(parts), reversed(sizes)):
            cols.append(p[rest % size])
            rest = rest // size
        block_rows = np.concatenate(cols[::-1], axis=1)
        rows[:, order] = block_rows
        ok = _violations(cross, rows) == 0
        found.append(rows[ok])
    return np.concatenate(found) if found else np.zeros((0, inst.n), dtype=np.int64)


def _counts(rows: np.ndarray, block, r: int) -> np.ndarray:
    sub = rows[:, list(block)]
    return np.stack([(sub == a).sum(axis=1) for a in range(r)], axis=1)


def verify_gadget(g: Gadget, cap: int = GADGET_CAP) -> Gadget:
    """Check the three numbered properties against every satisfying assignment."""
    rows = gadget_solutions(g, cap)
    t, r = g.t, g.instance.r
    counts = [_counts(rows, b, r) for b in g.blocks.values()]
    heavy = 0.1 * t
    if g.kind == "pac41":
        dummy = [3]
    elif g.kind == "sixpac":
        dummy = [3, 4, 5]
    else:
        dummy = [2]
    real = [a for a in range(r) if a not in dummy]

    if g.kind == "sixpac":
        p1 = all(not (c[:, dummy] >= 2).any() for c in counts)
    else:
        p1 = all(not (c[:, dummy] >= heavy).any() for c in counts)
    p2 = all(not ((c >= heavy).sum(axis=1) >= 2).any() for c in counts)

    dom_share = 0.9 if g.kind == "csp33" else 0.7
    doms = []
    for c in counts:
        best = np.argmax(c[:, real], axis=1)
        value = np.array(real)[best]
        has = c[np.arange(len(c)), value] >= dom_share * t
        doms.append(np.where(has, value, -1))
    if len(rows) == 0:
        p3 = True
    elif g.kind == "csp33":
        all_dom = (doms[0] >= 0) & (doms[1] >= 0) & (doms[2] >= 0)
        hit = all_dom & (doms[0] == g.sigma[0]) & (doms[1] == g.sigma[1]) & (doms[2] == g.sigma[2])
        p3 = not hit.any()
    else:
        p3 = not ((doms[0] >= 0) & (doms[0] == doms[1])).any()
    g.properties = {1: bool(p1), 2: bool(p2), 3: bool(p3)}
    g.satisfying = int(len(rows))
    g.verified = all(g.properties.values())
    return g


def gadget_search(kind: str, t: int, seed: int = 0, max_tries: int = 20,
                  sigma=(0, 0, 0)) -> Gadget:
    rng = np.random.default_rng(seed)
    last = None
    for attempt in range(1, max_tries + 1):
        g = verify_gadget(sample_gadget(kind, t, rng, sigma))
        g.tries = attempt
        last = g
        if g.verified:
            return g
    raise GadgetNotFound(kind, t, max_tries, last)
