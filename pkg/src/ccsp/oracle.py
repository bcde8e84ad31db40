"""Exhaustive ground truth.

Everything here walks the full product of label sets in lexicographic order,
in fixed-size numpy chunks. It is deliberately dumb: the other modules are
checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import SearchSpaceTooLarge
from .instance import Instance, from_label_string, to_label_string

DEFAULT_CAP = 2 ** 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SolutionSet:
    """Sorted, deduplicated full satisfying assignments as label strings."""

    assignments: tuple

    @classmethod
    def of(cls, items: Iterable) -> "SolutionSet":
        strings = {s if isinstance(s, str) else to_label_string(s) for s in items}
        return cls(tuple(sorted(strings)))

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def __contains__(self, item):
        if not isinstance(item, str):
            item = to_label_string(item)
        return item in set(self.assignments)

    def tuples(self) -> list[tuple]:
        return [from_label_string(s) for s in self.assignments]


def search_space(inst: Instance) -> int:
    return math.prod(len(s) for s in inst.label_sets)


def _chunks(inst: Instance, cap: int) -> Iterator[np.ndarray]:
    size = search_space(inst)
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} assignments exceed the cap of {cap}")
    labels = [np.array(sorted(s), dtype=np.int64) for s in inst.label_sets]
    radix = [len(s) for s in labels]
    strides = [math.prod(radix[i + 1:]) for i in range(inst.n)]
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(size, start + _CHUNK), dtype=np.int64)
        block = np.empty((len(idx), inst.n), dtype=np.int64)
        for i in range(inst.n):
            block[:, i] = labels[i][(idx // strides[i]) % radix[i]]
        yield block


def _violations(inst: Instance, block: np.ndarray) -> np.ndarray:
    """Number of violated constraints for every row of ``block``."""
    count = np.zeros(len(block), dtype=np.int64)
    for key, table in inst.constraints():
        if not table:
            continue
        w = inst.r ** np.arange(len(key) - 1, -1, -1)
        codes = block[:, list(key)] @ w
        bad = np.array([sum(a * int(b) for a, b in zip(t, w)) for t in table])
        count += np.isin(codes, bad)
    return count


def enumerate_bruteforce(inst: Instance, cap: int = DEFAULT_CAP) -> SolutionSet:
    found = []
    for block in _chunks(inst, cap):
        ok = _violations(inst, block) == 0
        found.extend(to_label_string(row) for row in block[ok])
    return SolutionSet(tuple(found))


def first_solution_bruteforce(inst: Instance, cap: int = DEFAULT_CAP):
    """Lexicographically smallest satisfying assignment, or None."""
    for block in _chunks(inst, cap):
        ok = np.flatnonzero(_violations(inst, block) == 0)
        if len(ok):
            return tuple(int(a) for a in block[ok[0]])
    return None


def min_unsat_bruteforce(inst: Instance, cap: int = DEFAULT_CAP):
    """(minimum number of violated constraints, lexicographically first witness)."""
    best, witness = None, None
    for block in _chunks(inst, cap):
        counts = _violations(inst, block)
        i = int(np.argmin(counts))
        if best is None or counts[i] < best:
            best, witness = int(counts[i]), tuple(int(a) for a in block[i])
    if best is None:
        return 0, ()
    return best, witness


def count_bound(n: int, k: int) -> int:
    """Sauer-Shelah bound sum_{i<k} C(n, i) on solutions of a complete Boolean k-CSP."""
    if n < k or k < 2:
        raise ValueError(f"need n >= k >= 2, got n={n} k={k}")
    return sum(math.comb(n, i) for i in range(k))


def min_unsat_cnf(n: int, clauses, cap: int = DEFAULT_CAP) -> tuple:
    """Minimum number of falsified clauses of a CNF given as DIMACS literal tuples."""
    if 2 ** n > cap:
        raise SearchSpaceTooLarge(f"2^{n} assignments exceed the cap of {cap}")
    best, witness = None, None
    for start in range(0, 2 ** n, _CHUNK):
        idx = np.arange(start, min(2 ** n, start + _CHUNK), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
        count = np.zeros(len(idx), dtype=np.int64)
        for clause in clauses:
            sat = np.zeros(len(idx), dtype=bool)
            for lit in clause:
                col = bits[:, abs(lit) - 1]
                sat |= (col == 1) if lit > 0 else (col == 0)
            count += ~sat
        i = int(np.argmin(count))
        if best is None or count[i] < best:
            best, witness = int(count[i]), tuple(int(b) for b in bits[i])
    return best, witness
