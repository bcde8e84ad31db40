import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccsp.errors import AlgoMismatch, NotInduced2, TrivialPredicate
from ccsp.induced2 import (SymmetricSpec, build_symmetric_instance, decide_induced2,
                           induced2_specs, is_induced2, project_branch,
                           random_induced2_instance)
from ccsp.instance import all_positive_ksat, random_complete_instance, validate_complete
from ccsp.oracle import first_solution_bruteforce

NAE3 = SymmetricSpec(3, {1, 2})


def test_spec_validation():
    with pytest.raises(TrivialPredicate):
        SymmetricSpec(3, {0, 1, 2, 3})
    with pytest.raises(ValueError):
        SymmetricSpec(3, set())
    with pytest.raises(ValueError):
        SymmetricSpec(3, {4})


def test_nae_tables():
    assert NAE3.unsat_tuples() == {(0, 0, 0), (1, 1, 1)}
    assert NAE3.unsat_tuples((1, 0, 0)) == {(1, 0, 0), (0, 1, 1)}
    assert NAE3.induced2
    assert not SymmetricSpec(4, {1, 2, 3}).induced2


def test_specs_enumeration():
    specs = induced2_specs(3)
    assert all(s.induced2 for s in specs)
    assert SymmetricSpec(3, {0, 1, 2}) not in specs
    assert NAE3 in specs


@pytest.mark.parametrize("n,sat", [(3, True), (4, True), (5, False), (6, False), (8, False)])
def test_all_positive_nae(n, sat):
    inst = build_symmetric_instance(n, NAE3)
    got, w = decide_induced2(inst)
    assert got == sat
    if sat:
        assert inst.satisfies(w)


def test_is_induced2():
    assert is_induced2(build_symmetric_instance(5, NAE3))
    # all-positive 3-SAT: fixing one variable to 1 leaves a trivial pair
    assert not is_induced2(all_positive_ksat(5, 3))
    with pytest.raises(NotInduced2):
        decide_induced2(all_positive_ksat(5, 3))


def test_rejects_non_boolean():
    inst = random_complete_instance(4, 3, 3, np.random.default_rng(0))
    with pytest.raises(AlgoMismatch):
        decide_induced2(inst)


def test_projection_is_complete(rng):
    inst = random_induced2_instance(7, 4, rng)
    proj = project_branch(inst, (0, 1), (1, 0))
    assert proj.n == 5
    assert validate_complete(proj).ok


def test_signed_instance(rng):
    planted = rng.integers(0, 2, 6)
    signs = {key: tuple(int(planted[v]) ^ (p == 0) for p, v in enumerate(key))
             for key in build_symmetric_instance(6, NAE3).clauses}
    inst = build_symmetric_instance(6, NAE3, signs)
    assert inst.satisfies(tuple(int(a) for a in planted))
    assert decide_induced2(inst)[0]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([3, 4]), st.booleans())
def test_matches_oracle(seed, k, planted):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(k, 10))
    p = rng.integers(0, 2, n) if planted else None
    inst = random_induced2_instance(n, k, rng, p)
    assert is_induced2(inst)
    sat, w = decide_induced2(inst)
    assert sat == (first_solution_bruteforce(inst) is not None)
    if planted:
        assert sat
    if sat:
        assert inst.satisfies(w)


def test_projection_alone_over_approximates():
    # NAE on five variables: the branch x0=0 projects to all-positive 2-SAT,
    # which is satisfiable, yet no extension satisfies the triples avoiding x0
    inst = build_symmetric_instance(5, NAE3)
    proj = project_branch(inst, (0,), (0,))
    assert first_solution_bruteforce(proj) is not None
    assert first_solution_bruteforce(inst) is None
    assert decide_induced2(inst) == (False, None)
