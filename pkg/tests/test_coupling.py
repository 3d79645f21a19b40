from __future__ import annotations

from fractions import Fraction as F

import pytest

from conftest import make_system
from cyccon.coupling import (
    PairMoments,
    chain_joint,
    coupling_variables,
    cycle_joint,
    max_pair_coupling,
    maximal_coupling,
    pair_table,
    triple_joint,
    verify_coupling,
)
from cyccon.datasets.lapkiewicz import lapkiewicz_dataset
from cyccon.errors import DomainError, InfeasibleCycle, InfeasiblePair, InfeasibleTriple, MarginalMismatch, TooManyVariables
from cyccon.joint import JointDistribution
from cyccon.model import pair_bounds
from cyccon.sweep import random_system


def _edge(rng, a, b):
    lo, hi = pair_bounds(a, b)
    return lo + (hi - lo) * F(int(rng.integers(0, 5)), 4)


def test_pair_table_perfect_correlation():
    t = pair_table(PairMoments(eA=0, eB=0, eAB=1))
    assert t.probs == (F(1, 2), 0, 0, F(1, 2))


def test_pair_table_published_marginals():
    m = max_pair_coupling("0.136", "0.172")
    assert m.eAB == F("0.964")
    assert m.equality_probability == F("0.982")
    t = pair_table(m)
    assert t.probs == (F("0.568"), 0, F("0.018"), F("0.414"))


def test_pair_table_infeasible():
    with pytest.raises(InfeasiblePair, match="lower bound"):
        pair_table(PairMoments(eA="0.5", eB="0.5", eAB="-0.5"))


@pytest.mark.parametrize(
    "a, b, eab, eq",
    [(0, 0, 1, 1), (1, -1, -1, 0)],
)
def test_max_pair_coupling(a, b, eab, eq):
    m = max_pair_coupling(a, b)
    assert m.eAB == eab
    assert m.equality_probability == eq


def test_pair_table_reproduces_moments(rng):
    for _ in range(200):
        a = F(int(rng.integers(-20, 21)), 20)
        b = F(int(rng.integers(-20, 21)), 20)
        m = max_pair_coupling(a, b)
        t = pair_table(m, ("X", "Y"))
        assert (t.expectation("X"), t.expectation("Y"), t.expectation("X", "Y")) == (a, b, m.eAB)
        assert t.pr_equal("X", "Y") == 1 - abs(a - b) / 2


def test_triple_joint_perfect_correlation():
    j = triple_joint(0, 0, 0, 1, 1, 1)
    assert j.support() == [((1, 1, 1), F(1, 2)), ((-1, -1, -1), F(1, 2))]


def test_triple_joint_parity_obstruction():
    with pytest.raises(InfeasibleTriple):
        triple_joint(0, 0, 0, 1, 1, -1)


def test_triple_joint_independence():
    assert triple_joint(0, 0, 0, 0, 0, 0).probs == (F(1, 8),) * 8


def test_triple_joint_reproduces_moments(rng):
    built = 0
    for _ in range(300):
        es = [F(int(v), 6) for v in rng.integers(-6, 7, size=3)]
        cs = [_edge(rng, es[i], es[(i + 1) % 3]) for i in range(3)]
        try:
            j = triple_joint(*es, *cs)
        except InfeasibleTriple:
            continue
        built += 1
        assert [j.expectation(v) for v in ("A", "B", "C")] == es
        assert [j.expectation("A", "B"), j.expectation("B", "C"), j.expectation("C", "A")] == cs
    assert built > 50


def test_chain_of_perfect_correlations():
    t = pair_table(PairMoments(eA=0, eB=0, eAB=1))
    j = chain_joint([JointDistribution(("V1", "V2"), t.probs), JointDistribution(("V2", "V3"), t.probs)])
    assert j.prob((1, 1, 1)) == j.prob((-1, -1, -1)) == F(1, 2)


def test_chain_forces_anticorrelation():
    same = pair_table(PairMoments(eA=0, eB=0, eAB=1), ("V1", "V2"))
    opposite = pair_table(PairMoments(eA=0, eB=0, eAB=-1), ("V2", "V3"))
    assert chain_joint([same, opposite]).expectation("V1", "V3") == -1


def test_chain_rejects_mismatched_marginals():
    left = pair_table(PairMoments(eA=0, eB=0, eAB=0), ("V1", "V2"))
    right = pair_table(PairMoments(eA="0.5", eB=0, eAB=0), ("V2", "V3"))
    with pytest.raises(MarginalMismatch):
        chain_joint([left, right])
    with pytest.raises(DomainError):
        chain_joint([])


def test_cycle_joint_perfect_four_cycle():
    j = cycle_joint([0] * 4, [1] * 4)
    assert j.support() == [((1, 1, 1, 1), F(1, 2)), ((-1, -1, -1, -1), F(1, 2))]


def test_cycle_joint_pr_box_is_infeasible():
    with pytest.raises(InfeasibleCycle) as exc:
        cycle_joint([0] * 4, [1, 1, 1, -1])
    assert exc.value.lhs == 4
    assert exc.value.bound == 2
    assert exc.value.witness.coefficients == (1, 1, 1, -1)


def test_cycle_joint_kcbs_boundary():
    c = [F("-0.6")] * 5
    j = cycle_joint([0] * 5, c)
    names = j.variables
    for i in range(5):
        assert j.expectation(names[i]) == 0
        assert j.expectation(names[i], names[(i + 1) % 5]) == F("-0.6")


def test_cycle_joint_caps_variables():
    with pytest.raises(TooManyVariables):
        cycle_joint([0] * 6, [0] * 6, max_variables=5)


def test_cycle_joint_random_feasible(rng):
    built = 0
    for _ in range(200):
        m = int(rng.integers(3, 8))
        e = [F(int(v), 4) for v in rng.integers(-4, 5, size=m)]
        c = [_edge(rng, e[i], e[(i + 1) % m]) for i in range(m)]
        try:
            j = cycle_joint(e, c)
        except InfeasibleCycle:
            continue
        built += 1
        names = j.variables
        for i in range(m):
            assert j.expectation(names[i]) == e[i]
            assert j.expectation(names[i], names[(i + 1) % m]) == c[i]
    assert built > 50


def test_coupling_variable_order():
    assert coupling_variables(3) == ("S1_c1", "S2_c1", "S2_c2", "S3_c2", "S3_c3", "S1_c3")


def test_maximal_coupling_all_equal():
    joint = maximal_coupling(make_system([1, 1, 1]))
    assert joint.support() == [((1,) * 6, F(1, 2)), ((-1,) * 6, F(1, 2))]
    assert verify_coupling(joint, make_system([1, 1, 1])) == []


def test_maximal_coupling_pr_box():
    with pytest.raises(InfeasibleCycle):
        maximal_coupling(make_system([1, 1, 1, -1]))


def test_maximal_coupling_lapkiewicz_point_system():
    with pytest.raises(InfeasibleCycle) as exc:
        maximal_coupling(lapkiewicz_dataset().point_system())
    assert exc.value.lhs == F("8.822")
    assert exc.value.bound == 8


def test_maximal_coupling_inconsistent_system():
    sys_ = make_system(["0.5", "0.25", "0"], [("0.5", "0"), ("0", "0.5"), ("0", "0")])
    joint = maximal_coupling(sys_)
    assert verify_coupling(joint, sys_) == []
    assert joint.pr_equal("S2_c1", "S2_c2") == 1
    assert joint.pr_equal("S3_c2", "S3_c3") == F(3, 4)


def test_verify_coupling_reports_mismatches():
    joint = maximal_coupling(make_system([1, 1, 1]))
    problems = verify_coupling(joint, make_system([1, 1, "0.5"]))
    assert problems == ["context 3: <S3_c3 S1_c3> = 1, expected 1/2"]
    short = JointDistribution(("S1_c1",), (F(1, 2), F(1, 2)))
    assert verify_coupling(short, make_system([0, 0, 0]))[0] == "missing variable S2_c1"


def test_maximal_coupling_random(rng):
    for _ in range(100):
        sys_ = random_system(rng, int(rng.integers(2, 6)), denominator=4)
        try:
            joint = maximal_coupling(sys_)
        except InfeasibleCycle:
            continue
        assert verify_coupling(joint, sys_) == []


def _random_chain(rng, length: int) -> list[JointDistribution]:
    es = [F(int(v), 6) for v in rng.integers(-6, 7, size=length)]
    return [
        pair_table(
            PairMoments(eA=es[j], eB=es[j + 1], eAB=_edge(rng, es[j], es[j + 1])),
            (f"V{j + 1}", f"V{j + 2}"),
        )
        for j in range(length - 1)
    ]


def _given(joint: JointDistribution, name: str, value: int, *names: str) -> F | None:
    """<prod names | name = value>, None when the condition has mass 0."""
    at = joint.variables.index(name)
    cols = [joint.variables.index(n) for n in names]
    mass = F(0)
    total = F(0)
    for a, p in joint.items():
        if a[at] != value:
            continue
        mass += p
        sign = 1
        for c in cols:
            sign *= a[c]
        total += sign * p
    return None if mass == 0 else total / mass


def test_chain_reproduces_every_input_table(rng):
    for _ in range(200):
        tables = _random_chain(rng, int(rng.integers(2, 7)))
        j = chain_joint(tables)
        for t in tables:
            m = j.marginal(t.variables)
            for a in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                assert m.prob(a) == t.prob(a)


def test_chain_is_markov(rng):
    for _ in range(200):
        tables = _random_chain(rng, int(rng.integers(3, 7)))
        j = chain_joint(tables)
        names = j.variables
        for k in range(1, len(names) - 1):
            before, mid, after = names[k - 1], names[k], names[k + 1]
            for v in (1, -1):
                both = _given(j, mid, v, before, after)
                if both is None:
                    continue
                assert both == _given(j, mid, v, before) * _given(j, mid, v, after)
