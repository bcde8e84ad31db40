import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccsp.errors import AlgoMismatch
from ccsp.instance import Instance
from ccsp.oracle import first_solution_bruteforce
from ccsp.pac import (COMPLETE, OVER, PacInstance, PacStats, csp_to_pac, decide_pac43,
                      decide_pac55, identity_pac, pac55_branch_sets, pac_to_csp, random_pac,
                      validate_pac)


def test_validate_codes():
    p = PacInstance(3, 4, 3, {(0, 1): [(0, 0), (1, 1), (2, 2)],
                              (0, 2): [(0, 0), (0, 1), (2, 2)]})
    codes = validate_pac(p).codes()
    assert codes == {"MissingPair", "NotAMatching"}
    short = PacInstance(2, 4, 3, {(0, 1): [(0, 0)]})
    assert validate_pac(short, OVER).codes() == {"SizeViolation"}
    assert validate_pac(identity_pac(3, 4), OVER).ok
    assert validate_pac(PacInstance(3, 4, 3, identity_pac(3, 4).matchings), COMPLETE).codes() \
        == {"SizeViolation"}
    with pytest.raises(ValueError):
        validate_pac(p, "nope")


def test_identity_is_proper_colouring():
    assert validate_pac(identity_pac(5, 5), COMPLETE).ok
    assert decide_pac55(identity_pac(5, 5))[0]
    assert not decide_pac55(identity_pac(6, 5))[0]
    p = identity_pac(5, 4)
    assert not decide_pac43(PacInstance(5, 4, 3, p.matchings))[0]
    assert decide_pac43(PacInstance(4, 4, 3, identity_pac(4, 4).matchings))[0]


def test_csp_roundtrip():
    p = identity_pac(4, 4)
    inst = pac_to_csp(p)
    assert csp_to_pac(inst, 4) == p
    with pytest.raises(AlgoMismatch):
        csp_to_pac(Instance(3, 2, 3, {(0, 1, 2): [(0, 0, 0)]}), 1)


def test_random_pac_valid(rng):
    assert validate_pac(random_pac(6, 5, 5, rng), COMPLETE).ok
    assert validate_pac(random_pac(6, 4, 3, rng, OVER), OVER).ok


def test_planted(rng):
    planted = rng.integers(0, 4, 7)
    p = random_pac(7, 4, 3, rng, COMPLETE, planted=planted, coherent=1.0)
    assert pac_to_csp(p).satisfies(tuple(int(a) for a in planted))


def test_branch_sets():
    p = identity_pac(4, 5)
    sets = pac55_branch_sets(p, 0, 2)
    assert sets[0] == {2}
    assert all(s == {0, 1, 3, 4} for s in sets[1:])


def test_rejections():
    with pytest.raises(AlgoMismatch):
        decide_pac43(identity_pac(3, 5))
    with pytest.raises(AlgoMismatch):
        decide_pac55(identity_pac(3, 4))
    with pytest.raises(AlgoMismatch):
        decide_pac43(PacInstance(3, 4, 3, {(0, 1): [(0, 0), (1, 1), (2, 2)]}))


def test_guess_count():
    stats = PacStats()
    decide_pac55(identity_pac(6, 5), stats=stats)
    assert stats.guesses == 5


def _pac43(rng, n):
    if rng.random() < 0.5:
        return random_pac(n, 4, 3, rng, OVER, coherent=1.0)
    q = random_pac(n, 4, 4, rng, COMPLETE, coherent=0.9)
    return PacInstance(n, 4, 3, q.matchings)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_pac43_matches_oracle(seed, cutoff):
    rng = np.random.default_rng(seed)
    p = _pac43(rng, int(rng.integers(2, 8)))
    sat, w = decide_pac43(p, small_cutoff=cutoff)
    inst = pac_to_csp(p)
    assert sat == (first_solution_bruteforce(inst) is not None)
    if sat:
        assert inst.satisfies(w)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_pac55_matches_oracle(seed, cutoff):
    rng = np.random.default_rng(seed)
    p = random_pac(int(rng.integers(2, 8)), 5, 5, rng, COMPLETE, coherent=0.9)
    sat, w = decide_pac55(p, small_cutoff=cutoff)
    inst = pac_to_csp(p)
    assert sat == (first_solution_bruteforce(inst) is not None)
    if sat:
        assert inst.satisfies(w)
