"""2-CSP over variables with at most two labels, via Boolean 2-SAT.

A literal is encoded as ``2*v + b`` meaning "variable v takes Boolean value
b"; its negation is ``lit ^ 1``. Each variable's (at most two) labels are
mapped to Boolean values in ascending order, so Boolean lexicographic order
agrees with label lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlgoMismatch
from .instance import Instance
from .oracle import SolutionSet


@dataclass(frozen=True)
class TwoCspView:
    n: int
    labels: tuple          # per variable, sorted tuple of 0, 1 or 2 labels
    clauses: tuple         # Boolean clauses as 1- or 2-tuples of literals
    origin: tuple          # per clause, the (key, unsat tuple) it came from

    @property
    def empty(self) -> bool:
        return any(not labs for labs in self.labels)

    @classmethod
    def from_instance(cls, inst: Instance, label_sets=None) -> "TwoCspView":
        sets = inst.label_sets if label_sets is None else label_sets
        labels = tuple(tuple(sorted(s)) for s in sets)
        if any(len(labs) > 2 for labs in labels):
            raise AlgoMismatch("2-CSP view needs every label set to have at most 2 labels")
        index = [{a: b for b, a in enumerate(labs)} for labs in labels]
        clauses, origin = [], []
        for v, labs in enumerate(labels):
            if len(labs) == 1:
                clauses.append((2 * v,))
                origin.append(((v,), None))
        for key, table in inst.constraints():
            if len(key) > 2:
                raise AlgoMismatch(f"constraint on {len(key)} variables in a 2-CSP")
            for t in sorted(table):
                if not all(a in index[v] for v, a in zip(key, t)):
                    continue
                clauses.append(tuple(2 * v + 1 - index[v][a] for v, a in zip(key, t)))
                origin.append((key, t))
        return cls(inst.n, labels, tuple(clauses), tuple(origin))

    def to_labels(self, bits) -> tuple:
        return tuple(self.labels[v][b] for v, b in enumerate(bits))


@dataclass
class ImplicationGraph:
    literal_count: int
    edges: list = field(default_factory=list)     # (from literal, to literal)
    origin: list = field(default_factory=list)    # clause index per edge

    def adjacency(self, deleted=()):
        deleted = set(deleted)
        adj = [[] for _ in range(self.literal_count)]
        for e, (u, v) in enumerate(self.edges):
            if e not in deleted:
                adj[u].append(v)
        return adj


def build_implication_graph(view: TwoCspView) -> ImplicationGraph:
    g = ImplicationGraph(2 * view.n)
    for c, clause in enumerate(view.clauses):
        if len(clause) == 1:
            (lit,) = clause
            g.edges.append((lit ^ 1, lit))
            g.origin.append(c)
        else:
            a, b = clause
            g.edges.extend([(a ^ 1, b), (b ^ 1, a)])
            g.origin.extend([c, c])
    return g


def strongly_connected_components(adj) -> list[int]:
    """Iterative Tarjan. Component ids are assigned in completion order,
    i.e. sink components first (reverse topological order)."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                w = adj[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


def consistency_check(graph: ImplicationGraph, deleted=()) -> bool:
    """True iff no variable has both literals in one strongly connected component."""
    comp = strongly_connected_components(graph.adjacency(deleted))
    return all(comp[2 * v] != comp[2 * v + 1] for v in range(graph.literal_count // 2))


def solve_implications(adj, n):
    """Boolean witness of the implication graph, or None when inconsistent."""
    comp = strongly_connected_components(adj)
    bits = []
    for v in range(n):
        f, t = comp[2 * v], comp[2 * v + 1]
        if f == t:
            return None
        bits.append(1 if t < f else 0)
    return bits


def _solve_bits(view: TwoCspView, forced=None):
    if view.empty:
        return None
    g = build_implication_graph(view)
    adj = g.adjacency()
    if forced:
        for v, b in forced.items():
            adj[2 * v + 1 - b].append(2 * v + b)
    return solve_implications(adj, view.n)


def decide_2csp(view: TwoCspView):
    """(sat, witness labels or None)."""
    bits = _solve_bits(view)
    if bits is None:
        return False, None
    return True, view.to_labels(bits)


def decide_instance(inst: Instance, label_sets=None):
    return decide_2csp(TwoCspView.from_instance(inst, label_sets))


@dataclass
class EnumStats:
    pruning_calls: int = 0


def enumerate_2csp(view: TwoCspView, stats: EnumStats | None = None) -> list[tuple]:
    """All satisfying label assignments, in lexicographic order.

    Branches on the lowest unset variable, value 0 before 1. Once the formula
    is known to be satisfiable, any implication-closed literal set without a
    complementary pair extends to a solution, so each branch only needs to
    propagate its literal (undone on backtrack) and never dead-ends.
    """
    if stats is None:
        stats = EnumStats()
    if view.empty:
        return []
    adj = build_implication_graph(view).adjacency()
    n = view.n
    stats.pruning_calls += 1
    if solve_implications(adj, n) is None:
        return []
    value = [-1] * n
    out = []

    def assign(lit, trail) -> bool:
        stack = [lit]
        while stack:
            cur = stack.pop()
            v, b = cur >> 1, cur & 1
            if value[v] == b:
                continue
            if value[v] == 1 - b:
                return False
            value[v] = b
            trail.append(v)
            stack.extend(adj[cur])
        return True

    def rec(v):
        while v < n and value[v] != -1:
            v += 1
        if v == n:
            out.append(view.to_labels(value))
            return
        for b in range(len(view.labels[v])):
            trail = []
            stats.pruning_calls += 1
            if assign(2 * v + b, trail):
                rec(v + 1)
            for u in trail:
                value[u] = -1

    # units and other forced literals are picked up by the first propagation
    rec(0)
    return out


def enumerate_complete_2csp(inst: Instance, stats: EnumStats | None = None) -> SolutionSet:
    if inst.k != 2:
        raise AlgoMismatch(f"2-CSP enumeration needs k=2, got k={inst.k}")
    return SolutionSet.of(enumerate_2csp(TwoCspView.from_instance(inst), stats))
