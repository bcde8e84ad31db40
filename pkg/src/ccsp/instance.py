"""Core data model for complete k-ary CSP instances.

Predicates are stored as sets of UNSAT tuples keyed by the strictly sorted
tuple of variable indices they constrain. Variables are 0-indexed in memory
and 1-indexed in the text format.

The CCSP text format::

    c comment
    p ccsp <k> <r> <n>
    d <var> <label> ...              optional, narrows the label set of <var>
    <v1> ... <vk> u <m> <t1> ... <tm>

Each ``t_j`` is a string of digits giving one UNSAT tuple in ascending
variable order. Constraint lines with fewer than ``k`` variables are side
constraints (the residues produced by :func:`restrict`).
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    ContradictionDetected,
    DuplicateClause,
    IndexOutOfRange,
    InstanceSyntaxError,
    LabelOutOfRange,
)

UNFIXED = None

Key = tuple  # strictly sorted tuple of variable indices
Table = frozenset  # frozenset of label tuples


@dataclass(frozen=True)
class Instance:
    k: int
    r: int
    n: int
    clauses: Mapping[Key, Table]
    label_sets: tuple = None
    side: Mapping[Key, Table] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1 or self.r < 2 or self.n < 0:
            raise ValueError(f"bad header k={self.k} r={self.r} n={self.n}")
        full = frozenset(range(self.r))
        if self.label_sets is None:
            object.__setattr__(self, "label_sets", (full,) * self.n)
        else:
            sets = tuple(frozenset(s) for s in self.label_sets)
            if len(sets) != self.n:
                raise ValueError("label_sets length differs from n")
            for s in sets:
                if not s <= full:
                    raise ValueError(f"label set {sorted(s)} outside alphabet")
            object.__setattr__(self, "label_sets", sets)
        object.__setattr__(self, "clauses", _freeze(self.clauses, self.n, self.r, self.k))
        object.__setattr__(self, "side", _freeze(self.side, self.n, self.r, None))

    # -- queries ---------------------------------------------------------
    @property
    def boolean(self) -> bool:
        return self.r == 2

    def constraints(self) -> Iterator[tuple[Key, Table]]:
        """All (key, unsat table) pairs, clauses first then side constraints."""
        yield from self.clauses.items()
        yield from self.side.items()

    def restricted_table(self, key: Key, table: Table | None = None) -> frozenset:
        if table is None:
            table = self.clauses[key] if key in self.clauses else self.side[key]
        sets = self.label_sets
        return frozenset(t for t in table if all(t[p] in sets[v] for p, v in enumerate(key)))

    def violated(self, assignment: Sequence[int]) -> list[Key]:
        return [key for key, table in self.constraints()
                if tuple(assignment[v] for v in key) in table]

    def unsat_count(self, assignment: Sequence[int]) -> int:
        return len(self.violated(assignment))

    def satisfies(self, assignment: Sequence[int]) -> bool:
        if len(assignment) != self.n:
            return False
        if any(a not in s for a, s in zip(assignment, self.label_sets)):
            return False
        for key, table in self.constraints():
            if tuple(assignment[v] for v in key) in table:
                return False
        return True

    def with_label_sets(self, label_sets) -> "Instance":
        return Instance(self.k, self.r, self.n, self.clauses, tuple(label_sets), self.side)

    def digest(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()[:16]


def _freeze(mapping, n, r, arity):
    out = {}
    for key, table in mapping.items():
        key = tuple(key)
        if arity is not None and len(key) != arity:
            raise ValueError(f"clause {key} has arity {len(key)}, expected {arity}")
        if any(b <= a for a, b in zip(key, key[1:])):
            raise ValueError(f"clause key {key} is not strictly sorted")
        if key and (key[0] < 0 or key[-1] >= n):
            raise ValueError(f"clause key {key} out of range for n={n}")
        tuples = frozenset(tuple(t) for t in table)
        for t in tuples:
            if len(t) != len(key) or any(not 0 <= a < r for a in t):
                raise ValueError(f"bad UNSAT tuple {t} for clause {key}")
        out[key] = tuples
    return out


def normalize_clause(variables: Sequence[int], tuples: Iterable[Sequence[int]]):
    """Sort a clause's variables ascending and permute its tuples to match."""
    order = sorted(range(len(variables)), key=lambda p: variables[p])
    key = tuple(variables[p] for p in order)
    if len(set(key)) != len(key):
        raise ValueError(f"repeated variable in clause {tuple(variables)}")
    return key, frozenset(tuple(t[p] for p in order) for t in tuples)


# -- assignments -----------------------------------------------------------

@dataclass(frozen=True)
class PartialAssignment:
    values: tuple

    @classmethod
    def empty(cls, n: int) -> "PartialAssignment":
        return cls((UNFIXED,) * n)

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[int, int]) -> "PartialAssignment":
        vals = [UNFIXED] * n
        for v, a in mapping.items():
            vals[v] = a
        return cls(tuple(vals))

    def fixed(self) -> dict[int, int]:
        return {v: a for v, a in enumerate(self.values) if a is not UNFIXED}

    def unfixed(self) -> list[int]:
        return [v for v, a in enumerate(self.values) if a is UNFIXED]

    def extend(self, mapping: Mapping[int, int]) -> "PartialAssignment":
        vals = list(self.values)
        for v, a in mapping.items():
            vals[v] = a
        return PartialAssignment(tuple(vals))

    def __len__(self):
        return len(self.values)


def to_label_string(assignment: Sequence[int]) -> str:
    return "".join(str(a) for a in assignment)


def from_label_string(s: str) -> tuple:
    return tuple(int(c) for c in s.strip())


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    code: str
    locus: tuple
    message: str


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code, locus, message):
        self.issues.append(Issue(code, tuple(locus), message))

    def codes(self) -> set:
        return {i.code for i in self.issues}

    def lines(self) -> list[str]:
        if self.ok:
            return ["ok"]
        return [f"{i.code} {' '.join(str(x + 1) for x in i.locus)}: {i.message}"
                for i in self.issues]


def validate_complete(inst: Instance) -> ValidationReport:
    rep = ValidationReport()
    if inst.n < inst.k:
        rep.add("TooFewVariables", (), f"n={inst.n} < k={inst.k}")
        return rep
    for v, s in enumerate(inst.label_sets):
        if not s:
            rep.add("EmptyLabelSet", (v,), "variable has no allowed label")
    for key in inst.clauses:
        if len(key) != inst.k:
            rep.add("ExtraClause", key, f"clause of arity {len(key)}")
    for key in inst.side:
        rep.add("ExtraClause", key, "side constraint in a complete instance")
    for key in itertools.combinations(range(inst.n), inst.k):
        if key not in inst.clauses:
            rep.add("IncompleteInstance", key, "no clause on this k-subset")
        elif not inst.restricted_table(key):
            rep.add("TrivialPredicate", key, "no UNSAT tuple within current label sets")
    return rep


# -- residual construction --------------------------------------------------

def restrict(inst: Instance, pa: PartialAssignment) -> Instance:
    """Substitute the fixed values of ``pa`` and return the residual instance.

    Fixed variables keep their index but get a singleton label set. Clauses
    touching fixed variables become lower-arity side constraints on their
    unfixed variables; always-SAT residues are dropped.
    """
    if len(pa) != inst.n:
        raise ValueError("partial assignment length differs from n")
    fixed = pa.fixed()
    for v, a in fixed.items():
        if a not in inst.label_sets[v]:
            raise ValueError(f"value {a} not allowed for variable {v}")
    labels = list(inst.label_sets)
    for v, a in fixed.items():
        labels[v] = frozenset((a,))

    clauses = {}
    side: dict[Key, set] = {}
    for key, table in inst.constraints():
        free = [p for p, v in enumerate(key) if v not in fixed]
        if len(free) == len(key):
            if len(key) == inst.k and key in inst.clauses:
                clauses[key] = table
            else:
                side.setdefault(key, set()).update(table)
            continue
        bound = [(p, fixed[key[p]]) for p in range(len(key)) if key[p] in fixed]
        residue = {tuple(t[p] for p in free) for t in table
                   if all(t[p] == a for p, a in bound)}
        sub = tuple(key[p] for p in free)
        if not sub:
            if residue:
                raise ContradictionDetected(f"clause {key} violated by fixed values")
            continue
        residue = {t for t in residue if all(t[i] in labels[v] for i, v in enumerate(sub))}
        if not residue:
            continue
        side.setdefault(sub, set()).update(residue)

    for sub, residue in side.items():
        space = math.prod(len(labels[v]) for v in sub)
        if len(residue) >= space:
            raise ContradictionDetected(f"variables {sub} have no satisfying labels")
    return Instance(inst.k, inst.r, inst.n, clauses, tuple(labels),
                    {key: frozenset(t) for key, t in side.items()})


# -- text format -------------------------------------------------------------

def parse_instance(text) -> Instance:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode()
    header = None
    label_sets = None
    clauses: dict = {}
    side: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "p":
            if header is not None:
                raise InstanceSyntaxError("second header line", lineno)
            if len(tok) != 5 or tok[1] != "ccsp":
                raise InstanceSyntaxError("expected 'p ccsp <k> <r> <n>'", lineno)
            try:
                k, r, n = (int(x) for x in tok[2:])
            except ValueError:
                raise InstanceSyntaxError("non-integer header field", lineno) from None
            if k < 1 or not 2 <= r <= 10 or n < 0:
                raise InstanceSyntaxError(f"unsupported header k={k} r={r} n={n}", lineno)
            header = (k, r, n)
            label_sets = [frozenset(range(r))] * n
            continue
        if header is None:
            raise InstanceSyntaxError("content before the 'p ccsp' header", lineno)
        k, r, n = header
        if tok[0] == "d":
            if len(tok) < 2:
                raise InstanceSyntaxError("'d' line needs a variable", lineno)
            v = _parse_var(tok[1], n, lineno)
            labs = set()
            for x in tok[2:]:
                a = _parse_int(x, lineno)
                if not 0 <= a < r:
                    raise LabelOutOfRange(f"label {a} outside 0..{r - 1}", lineno)
                labs.add(a)
            label_sets[v] = frozenset(labs)
            continue
        if "u" not in tok:
            raise InstanceSyntaxError("constraint line lacks the 'u' marker", lineno)
        at = tok.index("u")
        variables = [_parse_var(x, n, lineno) for x in tok[:at]]
        if not variables or len(variables) > k:
            raise InstanceSyntaxError(f"constraint with {len(variables)} variables", lineno)
        if len(set(variables)) != len(variables):
            raise InstanceSyntaxError("repeated variable in constraint", lineno)
        rest = tok[at + 1:]
        if not rest:
            raise InstanceSyntaxError("missing tuple count", lineno)
        m = _parse_int(rest[0], lineno)
        if len(rest) - 1 != m:
            raise InstanceSyntaxError(f"expected {m} tuples, found {len(rest) - 1}", lineno)
        tuples = []
        for s in rest[1:]:
            if len(s) != len(variables) or not s.isdigit():
                raise InstanceSyntaxError(f"bad tuple {s!r}", lineno)
            t = tuple(int(c) for c in s)
            if any(a >= r for a in t):
                raise LabelOutOfRange(f"tuple {s} uses a label outside 0..{r - 1}", lineno)
            tuples.append(t)
        key, table = normalize_clause(variables, tuples)
        target = clauses if len(key) == k else side
        if key in target:
            raise DuplicateClause(f"second constraint on variables "
                                  f"{' '.join(str(v + 1) for v in key)}", lineno)
        target[key] = table
    if header is None:
        raise InstanceSyntaxError("missing 'p ccsp' header")
    k, r, n = header
    return Instance(k, r, n, clauses, tuple(label_sets), side)


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise InstanceSyntaxError(f"expected an integer, got {tok!r}", lineno) from None


def _parse_var(tok, n, lineno):
    v = _parse_int(tok, lineno)
    if not 1 <= v <= n:
        raise IndexOutOfRange(f"variable {v} outside 1..{n}", lineno)
    return v - 1


def serialize_instance(inst: Instance, comments: Sequence[str] = ()) -> str:
    if inst.r > 10:
        raise ValueError("the text format supports alphabets of size at most 10")
    lines = [f"c {c}" for c in comments]
    lines.append(f"p ccsp {inst.k} {inst.r} {inst.n}")
    full = frozenset(range(inst.r))
    for v, s in enumerate(inst.label_sets):
        if s != full:
            lines.append(" ".join(["d", str(v + 1), *(str(a) for a in sorted(s))]))
    for mapping in (inst.clauses, inst.side):
        for key in sorted(mapping):
            tuples = sorted(mapping[key])
            lines.append(" ".join([*(str(v + 1) for v in key), "u", str(len(tuples)),
                                   *(to_label_string(t) for t in tuples)]))
    return "\n".join(lines) + "\n"


# -- generators ---------------------------------------------------------------

def all_positive_ksat(n: int, k: int) -> Instance:
    """Every k-subset forbids the all-zero tuple."""
    zero = frozenset([(0,) * k])
    return Instance(k, 2, n, {key: zero for key in itertools.combinations(range(n), k)})


def random_complete_instance(n, k, r, rng, min_tuples=1, max_tuples=1, planted=None):
    """Random complete instance with between ``min_tuples`` and ``max_tuples``
    UNSAT tuples per clause.

    With ``planted`` (a full assignment) no clause forbids the planted
    restriction, so the instance is satisfiable.
    """
    space = list(itertools.product(range(r), repeat=k))
    clauses = {}
    for key in itertools.combinations(range(n), k):
        pool = space
        if planted is not None:
            keep = tuple(planted[v] for v in key)
            pool = [t for t in space if t != keep]
        hi = min(max_tuples, len(pool))
        m = int(rng.integers(min(min_tuples, hi), hi + 1))
        idx = rng.choice(len(pool), size=m, replace=False)
        clauses[key] = frozenset(pool[i] for i in sorted(idx))
    return Instance(k, r, n, clauses)
