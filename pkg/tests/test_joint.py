from __future__ import annotations

from fractions import Fraction as F

import pytest

from cyccon.joint import JointDistribution, assignments, atom_index


def test_assignment_order():
    assert list(assignments(2)) == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    assert [atom_index(a) for a in assignments(3)] == list(range(8))


def test_rejects_bad_tables():
    with pytest.raises(ValueError, match="sum to 1"):
        JointDistribution(("A",), (F(1, 2), F(1, 4)))
    with pytest.raises(ValueError, match="negative"):
        JointDistribution(("A",), (F(3, 2), F(-1, 2)))
    with pytest.raises(ValueError, match="atoms"):
        JointDistribution(("A", "B"), (F(1, 2), F(1, 2)))
    with pytest.raises(ValueError, match="duplicate"):
        JointDistribution(("A", "A"), (F(1, 4),) * 4)


def test_moments_and_marginals():
    joint = JointDistribution.from_mapping(("A", "B", "C"), {(1, 1, -1): F(1, 2), (-1, 1, 1): F(1, 2)})
    assert joint.expectation("A") == 0
    assert joint.expectation("B") == 1
    assert joint.expectation("A", "C") == -1
    assert joint.expectation("A", "B", "C") == -1
    assert joint.marginal(["C", "A"]).probs == (0, F(1, 2), F(1, 2), 0)
    assert joint.pr_equal("A", "C") == 0
    assert joint.support() == [((1, 1, -1), F(1, 2)), ((-1, 1, 1), F(1, 2))]


def test_unknown_variable():
    joint = JointDistribution(("A",), (F(1), F(0)))
    with pytest.raises(KeyError):
        joint.expectation("Z")
