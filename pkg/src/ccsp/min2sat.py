"""Min-2-SAT on complete instances: vector relaxation plus ball rounding.

Every UNSAT tuple (a, b) on variables (i, j) is one 2-SAT clause
(x_i != a) or (x_j != b). Literal ``2*v + c`` means x_v = c, with vector
``+u_v`` for c = 1 and ``-u_v`` for c = 0, so negated literals are exact
mirrors.

The relaxation is solved by a low-rank factorisation (one unit row per
variable plus v0) minimised with L-BFGS on the objective plus a squared
hinge penalty for the triangle inequalities over all literals and v0, with an
increasing penalty weight. Distances are derived from one symmetrised Gram
matrix, which makes d(p, q) == d(-q, -p) hold bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import AlgoMismatch
from .instance import Instance
from .twocsp import (ImplicationGraph, TwoCspView, build_implication_graph,
                     consistency_check, solve_implications)

THETA_RANGE = (0.001, 0.002)
GAMMA_RANGE = (0.1, 0.11)
TOL = 1e-4


def directed_distance(u, w, v0) -> float:
    u, w, v0 = (np.asarray(x, dtype=float) for x in (u, w, v0))
    return float((1 + v0 @ u - v0 @ w - u @ w) / 4)


def clause_list(inst: Instance) -> list[tuple]:
    """(literal, literal) per clause, in the implication-graph clause order."""
    return list(_view(inst).clauses)


def _view(inst: Instance) -> TwoCspView:
    if inst.k != 2 or inst.r != 2:
        raise AlgoMismatch(f"Min-2-SAT needs k=2 r=2, got k={inst.k} r={inst.r}")
    if inst.side or any(len(s) != 2 for s in inst.label_sets):
        raise AlgoMismatch("Min-2-SAT needs full label sets and no side constraints")
    return TwoCspView.from_instance(inst)


@dataclass
class SdpSolution:
    dim: int
    v0: np.ndarray
    vectors: np.ndarray          # (2n, dim), row 2v+c is the literal x_v = c
    objective: float
    converged: bool = True
    max_violation: float = 0.0
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.vectors) // 2

    @property
    def bias(self) -> np.ndarray:
        return self._parts()[0]

    def _parts(self, with_v0=False):
        # v0 joins as a virtual variable: row 2n is -v0, row 2n+1 is v0
        u = self.vectors[1::2]
        bu = u @ self.v0
        gu = u @ u.T
        gu = (gu + gu.T) / 2
        m = self.n
        if with_v0:
            gu = np.block([[gu, bu[:, None]], [bu[None, :], np.ones((1, 1))]])
            bu = np.append(bu, 1.0)
            m += 1
        np.fill_diagonal(gu, 1.0)
        sign = np.tile([-1.0, 1.0], m)
        var = np.repeat(np.arange(m), 2)
        b = sign * bu[var]
        g = np.outer(sign, sign) * gu[np.ix_(var, var)]
        return b, g

    def distances(self, with_v0: bool = False) -> np.ndarray:
        """d[p, q] between literals; ``with_v0`` appends -v0 and v0 as rows
        2n and 2n+1, so negation stays ``p ^ 1`` on the extended set."""
        b, g = self._parts(with_v0)
        return (1 + (b[:, None] - b[None, :]) - g) / 4

    def points(self) -> np.ndarray:
        """Literal vectors followed by v0 (the triangle-inequality point set)."""
        return np.vstack([self.vectors, self.v0[None, :]])


def _selector(n: int) -> np.ndarray:
    """Signed map from [v0; u_1..u_n] to [literals; v0]."""
    m = np.zeros((2 * n + 1, n + 1))
    for v in range(n):
        m[2 * v, v + 1] = -1.0
        m[2 * v + 1, v + 1] = 1.0
    m[2 * n, 0] = 1.0
    return m


def _objective_matrix(n: int, clauses) -> tuple[float, np.ndarray]:
    """f = const + <C, Gfull> for Gfull the Gram matrix of [literals; v0]."""
    c = np.zeros((2 * n + 1, 2 * n + 1))
    zero = 2 * n
    for lit1, lit2 in clauses:
        p, q = lit1 ^ 1, lit2
        c[p, zero] += 0.25
        c[q, zero] -= 0.25
        c[p, q] -= 0.25
    return len(clauses) / 4, c


def _triangle(g: np.ndarray, mu: float, want_grad: bool = True, chunk: int = 1 << 21):
    """Squared-hinge penalty of |p-r|^2 <= |p-q|^2 + |q-r|^2 over all triples."""
    m = len(g)
    step = max(1, chunk // (m * m))
    pen = 0.0
    worst = 0.0
    grad = np.zeros_like(g) if want_grad else None
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        # viol[p, q, r] = -2 + 2 (g_pq + g_qr - g_pr), p in [lo, hi)
        viol = -2 + 2 * (g[lo:hi, :, None] + g[None, :, :] - g[lo:hi, None, :])
        h = np.maximum(viol, 0.0)
        worst = max(worst, float(h.max()))
        pen += mu * float((h * h).sum())
        if want_grad:
            w = 4 * mu * h
            grad[lo:hi, :] += w.sum(axis=2)
            grad += w.sum(axis=0)
            grad[lo:hi, :] -= w.sum(axis=1)
    return pen, grad, worst


def solve_sdp(inst: Instance, seed: int = 0, iterations: int = 5000, rank: int | None = None,
              schedule=(1.0, 10.0, 100.0, 1000.0, 1e4)) -> SdpSolution:
    view = _view(inst)
    n = inst.n
    clauses = view.clauses
    dim = rank or min(2 * n + 1, math.ceil(math.sqrt(4 * n)) + 2)
    dim = max(dim, 2)
    if n == 0:
        v0 = np.eye(dim)[0]
        return SdpSolution(dim, v0, np.zeros((0, dim)), 0.0)
    sel = _selector(n)
    const, cmat = _objective_matrix(n, clauses)
    cmat = (cmat + cmat.T) / 2
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n + 1, dim))
    used = 0
    worst = math.inf

    def unpack(flat):
        y = flat.reshape(n + 1, dim)
        norm = np.linalg.norm(y, axis=1, keepdims=True)
        norm = np.maximum(norm, 1e-12)
        return y, norm, y / norm

    def fun(flat, mu):
        y, norm, z = unpack(flat)
        gfull = sel @ (z @ z.T) @ sel.T
        pen, ggrad, _ = _triangle(gfull, mu)
        val = const + float((cmat * gfull).sum()) + pen
        ggrad = ggrad + cmat
        ggrad = (ggrad + ggrad.T) / 2
        gz = sel.T @ ggrad @ sel                   # d/dG for G = z z^T
        dz = 2 * gz @ z
        dy = (dz - z * (dz * z).sum(axis=1, keepdims=True)) / norm
        return val, dy.ravel()

    per_round = max(20, iterations // len(schedule))
    for mu in schedule:
        res = minimize(fun, y.ravel(), args=(mu,), jac=True, method="L-BFGS-B",
                       options={"maxiter": per_round, "gtol": 1e-9, "ftol": 1e-13})
        y = res.x.reshape(n + 1, dim)
        used += int(res.nit)
        _, _, z = unpack(res.x)
        gfull = sel @ (z @ z.T) @ sel.T
        worst = _triangle(gfull, 1.0, want_grad=False)[2]
        if worst <= TOL * 0.1 and mu >= schedule[min(2, len(schedule) - 1)]:
            break

    _, _, z = unpack(y.ravel())
    v0 = z[0]
    vectors = np.empty((2 * n, dim))
    vectors[1::2] = z[1:]
    vectors[0::2] = -z[1:]
    sol = SdpSolution(dim, v0, vectors, 0.0, worst <= TOL, worst, used)
    d = sol.distances()
    sol.objective = float(sum(d[a ^ 1, b] for a, b in clauses))
    return sol


# -- rounding ------------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    kind: str              # "bias" or "ball"
    center: int            # literal id, -1 for the bias step
    radius: float
    out_size: int
    in_size: int
    deleted: int
    mirrored: bool = True  # B_in is the negation of B_out


@dataclass
class RoundingOutcome:
    deleted_clauses: frozenset
    deleted_edges: frozenset
    assignment: tuple | None
    assignment_cost: int
    trace: list = field(default_factory=list)
    consistent: bool = True
    symmetric: bool = True
    theta: float = 0.0
    trial: int = 0
    warning: str | None = None

    @property
    def cost(self) -> int:
        return len(self.deleted_clauses)


@dataclass(frozen=True)
class Preprocessed:
    theta: float
    b_plus: frozenset
    b_minus: frozenset
    deleted_edges: frozenset
    forced: dict           # variable -> value set by the bias step


def _edge_arrays(graph: ImplicationGraph):
    if not graph.edges:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    e = np.array(graph.edges, dtype=int)
    return e[:, 0], e[:, 1]


def preprocess_bias(inst: Instance, sdp: SdpSolution, theta: float,
                    graph: ImplicationGraph | None = None) -> Preprocessed:
    lo, hi = THETA_RANGE
    if not lo <= theta <= hi:
        raise ValueError(f"theta={theta} outside [{lo}, {hi}]")
    graph = graph or build_implication_graph(_view(inst))
    b = sdp.bias
    plus = b >= theta
    minus = plus[np.arange(len(b)) ^ 1]
    src, dst = _edge_arrays(graph)
    cut = (plus[src] & ~plus[dst]) | (minus[dst] & ~minus[src])
    forced = {int(p) // 2: int(p) & 1 for p in np.flatnonzero(plus)}
    return Preprocessed(theta, frozenset(np.flatnonzero(plus).tolist()),
                        frozenset(np.flatnonzero(minus).tolist()),
                        frozenset(np.flatnonzero(cut).tolist()), forced)


def balls(dist: np.ndarray, center: int, gamma: float, alive: np.ndarray):
    """(B_out(v_center, gamma), B_in(v_not-center, gamma)) among alive literals."""
    out = alive & (dist[center, :] <= gamma)
    inn = alive & (dist[:, center ^ 1] <= gamma)
    return out, inn


def _trial(graph, src, dst, dist, bias, rng, theta=None, pre=None, inst=None, sdp=None):
    n2 = len(bias)
    n = n2 // 2
    neg = np.arange(n2) ^ 1
    if pre is None:
        theta = float(rng.uniform(*THETA_RANGE)) if theta is None else theta
        pre = preprocess_bias(inst, sdp, theta, graph)
    deleted = np.zeros(len(src), dtype=bool)
    deleted[list(pre.deleted_edges)] = True
    alive = np.ones(n2, dtype=bool)
    removed = np.zeros(n2, dtype=bool)
    removed[list(pre.b_plus | pre.b_minus)] = True
    alive &= ~removed
    trace = [TraceStep("bias", -1, pre.theta, len(pre.b_plus), len(pre.b_minus),
                       int(deleted.sum()), pre.b_minus == {p ^ 1 for p in pre.b_plus})]

    for x in rng.permutation(n):
        x = int(x)
        if not alive[2 * x + 1]:
            continue
        center = 2 * x + 1 if bias[2 * x + 1] >= 0 else 2 * x
        gamma = float(rng.uniform(*GAMMA_RANGE))
        out, inn = balls(dist, center, gamma, alive)
        live = alive[src] & alive[dst]
        cut = live & ((out[src] & ~out[dst]) | (inn[dst] & ~inn[src]))
        deleted |= cut
        alive &= ~(out | inn)
        trace.append(TraceStep("ball", center, gamma, int(out.sum()), int(inn.sum()),
                               int(cut.sum()), bool(np.array_equal(inn, out[neg]))))
    return pre.theta, deleted, trace


def _outcome(inst, graph, deleted, trace, theta, trial, warning=None) -> RoundingOutcome:
    n = inst.n
    edge_ids = frozenset(np.flatnonzero(deleted).tolist())
    clause_ids = frozenset(graph.origin[e] for e in edge_ids)
    # deleting (p, q) must come with its mirror (q^1, p^1)
    mirror = {(graph.edges[e][1] ^ 1, graph.edges[e][0] ^ 1) for e in edge_ids}
    symmetric = mirror == {graph.edges[e] for e in edge_ids}
    adj = graph.adjacency(edge_ids)
    bits = solve_implications(adj, n)
    consistent = bits is not None
    assignment = tuple(bits) if consistent else None
    cost = inst.unsat_count(assignment) if consistent else -1
    return RoundingOutcome(clause_ids, edge_ids, assignment, cost, trace, consistent,
                           symmetric, theta, trial, warning)


def round_ckr(inst: Instance, sdp: SdpSolution, seed: int = 0, trials: int = 32,
              theta: float | None = None) -> RoundingOutcome:
    """Best of ``trials`` independent runs (bias step, random order, random radii).

    ``theta`` fixes the bias threshold; by default each trial draws its own.
    """
    outcomes = rounding_trials(inst, sdp, seed, trials, theta)
    return min(outcomes, key=lambda o: (o.cost, o.trial))


def rounding_trials(inst: Instance, sdp: SdpSolution, seed: int = 0, trials: int = 32,
                    theta: float | None = None) -> list[RoundingOutcome]:
    graph = build_implication_graph(_view(inst))
    src, dst = _edge_arrays(graph)
    dist = sdp.distances()
    bias = sdp.bias
    warning = None if sdp.converged else f"sdp not converged (violation {sdp.max_violation:.2e})"
    out = []
    for t, child in enumerate(np.random.SeedSequence(seed).spawn(max(1, trials))):
        rng = np.random.default_rng(child)
        th, deleted, trace = _trial(graph, src, dst, dist, bias, rng, theta, inst=inst, sdp=sdp)
        out.append(_outcome(inst, graph, deleted, trace, th, t, warning))
    return out


def min2sat_approx(inst: Instance, seed: int = 0, sdp_iters: int = 5000,
                   trials: int = 32) -> tuple[RoundingOutcome, SdpSolution]:
    if inst.n <= 1:
        view = _view(inst)
        graph = build_implication_graph(view)
        empty = np.zeros(len(graph.edges), dtype=bool)
        sdp = solve_sdp(inst, seed, sdp_iters)
        return _outcome(inst, graph, empty, [], 0.0, 0), sdp
    sdp = solve_sdp(inst, seed, sdp_iters)
    outcome = round_ckr(inst, sdp, seed, trials)
    return outcome, sdp


__all__ = [
    "SdpSolution", "RoundingOutcome", "Preprocessed", "TraceStep", "directed_distance",
    "solve_sdp", "preprocess_bias", "balls", "round_ckr", "rounding_trials",
    "min2sat_approx", "consistency_check", "clause_list",
]
