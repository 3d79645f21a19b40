from __future__ import annotations

from fractions import Fraction as F

import pytest
from pydantic import ValidationError

from conftest import LAPKIEWICZ_DELTAS, make_system
from cyccon.errors import InfeasibleContext, LayoutError, MultipleCycles, SystemFormatError
from cyccon.model import (
    MomentEntry,
    SystemLayout,
    build_cyclic_system,
    build_cyclic_systems,
    decompose_cycles,
    parse_system_json,
    system_to_json,
    validate_layout,
)


def _layout(*contexts: tuple[str, ...]) -> SystemLayout:
    props = sorted({p for c in contexts for p in c})
    return SystemLayout(properties=props, contexts=[list(c) for c in contexts])


def _entry(a: str, b: str, e1: object = 0, e2: object = 0, corr: object = 0) -> MomentEntry:
    return MomentEntry(context=[a, b], e_first=e1, e_second=e2, corr=corr)


# ---------------------------------------------------------------------------
# Layout validation and cycles
# ---------------------------------------------------------------------------


def test_minimal_triangle_is_valid():
    assert validate_layout(_layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))) == []


def test_open_chain_violates_degree():
    issues = validate_layout(_layout(("q1", "q2"), ("q2", "q3")))
    assert {(i.kind, i.subject) for i in issues} == {("PropertyDegree", "q1"), ("PropertyDegree", "q3")}


def test_three_member_context_violates_arity():
    issues = validate_layout(SystemLayout(properties=["q1", "q2", "q3"], contexts=[["q1", "q2", "q3"]]))
    assert "ContextArity" in {i.kind for i in issues}


def test_unknown_and_duplicate_properties_reported():
    layout = SystemLayout(properties=["a", "a", "b"], contexts=[["a", "b"], ["b", "c"]])
    kinds = {i.kind for i in validate_layout(layout)}
    assert {"DuplicateProperty", "UnknownProperty"} <= kinds


def test_decompose_single_cycle():
    assert decompose_cycles(_layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))) == [("q1", "q2", "q3")]


def test_decompose_two_disjoint_cycles():
    layout = _layout(("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x"))
    assert decompose_cycles(layout) == [("a", "b", "c"), ("x", "y", "z")]


def test_decompose_rank_two():
    assert decompose_cycles(_layout(("q1", "q2"), ("q2", "q1"))) == [("q1", "q2")]


def test_decompose_walks_toward_lesser_neighbour():
    layout = _layout(("a", "d"), ("d", "c"), ("c", "b"), ("b", "a"))
    assert decompose_cycles(layout) == [("a", "b", "c", "d")]


def test_decompose_is_independent_of_input_order():
    contexts = [("q3", "q1"), ("q2", "q3"), ("q1", "q2"), ("r2", "r1"), ("r1", "r3"), ("r3", "r2")]
    forward = decompose_cycles(_layout(*contexts))
    backward = decompose_cycles(_layout(*reversed(contexts)))
    assert forward == backward


def test_decompose_rejects_invalid_layout():
    with pytest.raises(LayoutError) as exc:
        decompose_cycles(_layout(("q1", "q2"), ("q2", "q3")))
    assert len(exc.value.issues) == 2


# ---------------------------------------------------------------------------
# Building systems
# ---------------------------------------------------------------------------


def test_build_perfect_triangle():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [_entry("q1", "q2", corr=1), _entry("q2", "q3", corr=1), _entry("q3", "q1", corr=1)]
    sys_ = build_cyclic_system(layout, moments)
    assert sys_.rank == 3
    assert sys_.deltas() == [0, 0, 0]
    assert sys_.is_consistent()


def test_build_rejects_lower_bound_violation():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [
        _entry("q1", "q2", "0.5", "0.5", "-0.5"),
        _entry("q2", "q3", "0.5", "0.5", "1"),
        _entry("q3", "q1", "0.5", "0.5", "1"),
    ]
    with pytest.raises(InfeasibleContext) as exc:
        build_cyclic_system(layout, moments)
    assert exc.value.index == 1
    assert exc.value.lower == 0


def test_clamp_projects_and_records_adjustment(caplog):
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [
        _entry("q1", "q2", "0.5", "0.5", "-0.5"),
        _entry("q2", "q3", "0.5", "0.5", "1"),
        _entry("q3", "q1", "0.5", "0.5", "1"),
    ]
    with caplog.at_level("WARNING"):
        sys_ = build_cyclic_system(layout, moments, clamp=True)
    assert sys_.contexts[0].corr == 0
    assert [(a.context, a.original, a.clamped) for a in sys_.adjustments] == [(1, F(-1, 2), 0)]
    assert "clamped" in caplog.text


def test_reversed_moment_entry_is_reoriented():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [
        _entry("q2", "q1", "0.2", "0.1", "0"),
        _entry("q2", "q3", "0", "0", "0"),
        _entry("q3", "q1", "0", "0", "0"),
    ]
    ctx = build_cyclic_system(layout, moments).contexts[0]
    assert (ctx.e_ii, ctx.e_next) == (F(1, 10), F(1, 5))


def test_rank_two_pair_of_contexts_on_same_properties():
    layout = SystemLayout(properties=["q1", "q2"], contexts=[["q1", "q2"], ["q2", "q1"]])
    moments = [_entry("q1", "q2", "0", "0", "1"), _entry("q2", "q1", "0", "0", "-1")]
    sys_ = build_cyclic_system(layout, moments)
    assert sys_.rank == 2
    assert sys_.corrs() == [1, -1]


def test_multiple_cycles_need_per_cycle_analysis():
    layout = _layout(("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x"))
    moments = [_entry(*c) for c in (("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x"))]
    with pytest.raises(MultipleCycles):
        build_cyclic_system(layout, moments)
    systems = build_cyclic_systems(layout, moments)
    assert [s.labels for s in systems] == [("a", "b", "c"), ("x", "y", "z")]


def test_missing_and_leftover_moments():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    with pytest.raises(SystemFormatError):
        build_cyclic_system(layout, [_entry("q1", "q2"), _entry("q2", "q3")])
    with pytest.raises(SystemFormatError):
        build_cyclic_system(
            layout,
            [_entry("q1", "q2"), _entry("q2", "q3"), _entry("q3", "q1"), _entry("q1", "q2")],
        )


def test_rank_one_is_rejected():
    with pytest.raises(ValidationError):
        make_system([1])


def test_lapkiewicz_style_deltas():
    # <R_i^i> = Δ_i / 2, <R_i^(i-1)> = -Δ_i / 2
    d = LAPKIEWICZ_DELTAS
    means = [(d[i] / 2, -d[(i + 1) % 5] / 2) for i in range(5)]
    sys_ = make_system([F("-0.8")] * 5, means)
    assert sys_.deltas() == d


def test_connection_deltas_records():
    sys_ = make_system([0, 0, 0], [(F(1, 2), 0), (0, 0), (0, F(1, 4))])
    records = sys_.connection_deltas()
    assert [r.delta for r in records] == [F(1, 4), 0, 0]
    assert [r.consistent for r in records] == [False, True, True]
    assert records[0].max_equal_corr == F(3, 4)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def test_system_json_round_trip():
    sys_ = make_system(["-0.805", "1/3", "-0.25"], [("0.1", "-0.2"), ("0", "0.3"), ("0.5", "-0.5")])
    again = parse_system_json(system_to_json(sys_))
    rebuilt = build_cyclic_system(again.layout, again.moments)
    assert rebuilt.contexts == sys_.contexts
    assert rebuilt.labels == sys_.labels


def test_system_json_accepts_numbers_and_strings():
    text = """
    {"properties": ["q1", "q2", "q3"],
     "contexts": [["q1", "q2"], ["q2", "q3"], ["q3", "q1"]],
     "moments": [
       {"context": ["q1", "q2"], "e_first": 0.1, "e_second": "0.2", "corr": "1/2"},
       {"context": ["q2", "q3"], "e_first": 0, "e_second": 0, "corr": 0},
       {"context": ["q3", "q1"], "e_first": 0, "e_second": 0, "corr": 0}
     ]}
    """
    sf = parse_system_json(text)
    ctx = build_cyclic_system(sf.layout, sf.moments).contexts[0]
    assert (ctx.e_ii, ctx.e_next, ctx.corr) == (F(1, 10), F(1, 5), F(1, 2))


def test_out_of_range_moment_is_a_format_error():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [_entry("q1", "q2", "1.5", "0", "0"), _entry("q2", "q3"), _entry("q3", "q1")]
    with pytest.raises(SystemFormatError):
        build_cyclic_system(layout, moments)


def test_rotation_and_reflection_preserve_deltas_multiset():
    sys_ = make_system(["0.1", "0.2", "-0.3", "0.4"], [("0.1", "0"), ("0.2", "0.1"), ("0", "-0.1"), ("0.3", "0")])
    rot = sys_.rotated(1)
    ref = sys_.reflected()
    assert sorted(abs(d) for d in rot.deltas()) == sorted(abs(d) for d in sys_.deltas())
    assert sorted(abs(d) for d in ref.deltas()) == sorted(abs(d) for d in sys_.deltas())
    assert sorted(ref.corrs()) == sorted(sys_.corrs())


def test_relabelled_copies_keep_clamp_adjustments():
    layout = _layout(("q1", "q2"), ("q2", "q3"), ("q3", "q1"))
    moments = [
        _entry("q1", "q2", "0.5", "0.5", "-0.5"),
        _entry("q2", "q3", "0.5", "0.5", "1"),
        _entry("q3", "q1", "0.5", "0.5", "1"),
    ]
    sys_ = build_cyclic_system(layout, moments, clamp=True)
    rot = sys_.rotated(1)
    ref = sys_.reflected()
    assert [a.context for a in rot.adjustments] == [3]
    assert [a.context for a in ref.adjustments] == [2]
    for copy in (rot, ref, sys_.rotated(5), ref.rotated(2)):
        [adj] = copy.adjustments
        assert (adj.original, adj.clamped) == (F(-1, 2), 0)
        assert copy.contexts[adj.context - 1].corr == adj.clamped
