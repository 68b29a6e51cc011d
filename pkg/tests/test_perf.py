"""Cost-model checks against closed forms computed by hand."""

import math

import pytest
from hypothesis import given, strategies as st

from incsim.collectives import (
    CollectiveKind,
    CollectiveSpec,
    Communicator,
    ring_allreduce_schedule,
)
from incsim.numerics import ElemType
from incsim.perf import (
    AlphaBeta,
    AmdahlResult,
    DpTrainingModel,
    amdahl_dp,
    inc_allreduce_time,
    pipeline_time,
    schedule_time,
    sweep_fig4,
)


class FakeTree:
    """Minimal stand-in exposing only the hop-ratio interface."""

    def __init__(self, ratios):
        self._ratios = tuple(ratios)

    def pipeline_hop_ratios(self):
        return self._ratios


def ar_spec(n, count):
    return CollectiveSpec(
        CollectiveKind.ALLREDUCE, Communicator(tuple(f"h{i}" for i in range(n))), count, ElemType.FP32
    )


def test_empty_schedule_costs_zero():
    sched = ring_allreduce_schedule(ar_spec(1, 8))
    assert sched.num_rounds == 0
    assert schedule_time(sched, AlphaBeta(1e-6, 1e-9)) == 0.0


def test_single_transfer_closed_form():
    sched = ring_allreduce_schedule(ar_spec(2, 2))
    ab = AlphaBeta(2e-6, 3e-9)
    # 2 rounds, each one 4-byte segment per rank: 2 * (alpha + 4 * beta)
    assert schedule_time(sched, ab) == pytest.approx(2 * (2e-6 + 4 * 3e-9))


def test_ring_allreduce_n4_closed_form():
    n, count = 4, 16
    sched = ring_allreduce_schedule(ar_spec(n, count))
    ab = AlphaBeta(1e-6, 2e-9)
    seg_bytes = (count // n) * 4
    assert schedule_time(sched, ab) == pytest.approx(2 * (n - 1) * (ab.alpha + seg_bytes * ab.beta))


def test_pipeline_time_fill_plus_drain():
    assert pipeline_time([], 5) == 0.0
    assert pipeline_time([1.0, 2.0, 0.5], 1) == pytest.approx(3.5)
    assert pipeline_time([1.0, 2.0, 0.5], 4) == pytest.approx(3.5 + 3 * 2.0)
    with pytest.raises(ValueError):
        pipeline_time([1.0], 0)


def test_inc_time_single_segment_depth_one_each_way():
    ab = AlphaBeta(1e-5, 1e-9, segment_bytes=4096)
    t = inc_allreduce_time(FakeTree([1.0, 1.0]), 4096, ab)
    assert t == pytest.approx(2 * (1e-5 + 4096 * 1e-9))


def test_inc_time_wide_edge_scales_its_term():
    ab = AlphaBeta(0.0, 1e-9, segment_bytes=1024)
    narrow = inc_allreduce_time(FakeTree([1.0, 1.0, 1.0, 1.0]), 1024, ab)
    wide = inc_allreduce_time(FakeTree([1.0, 4.0, 1.0, 1.0]), 1024, ab)
    assert wide - narrow == pytest.approx(3 * 1024 * 1e-9)


def test_inc_time_deep_pipeline_depth_independent_limit():
    ab = AlphaBeta(0.0, 1e-9, segment_bytes=512)
    total = 512 * 10_000
    shallow = inc_allreduce_time(FakeTree([1.0] * 2), total, ab)
    deep = inc_allreduce_time(FakeTree([1.0] * 8), total, ab)
    limit = (total / 512) * (512 * 1e-9)
    assert shallow == pytest.approx(limit, rel=1e-3)
    assert deep == pytest.approx(limit, rel=1e-3)


def test_ring_over_inc_converges_to_bandwidth_halving():
    n, count = 8, 1 << 18  # 1 MiB of fp32
    sched = ring_allreduce_schedule(ar_spec(n, count))
    ab = AlphaBeta(0.0, 1e-9, segment_bytes=256)
    ring = schedule_time(sched, ab)
    inc = inc_allreduce_time(FakeTree([1.0, 1.0, 1.0, 1.0]), count * 4, ab)
    assert ring / inc == pytest.approx(2 * (n - 1) / n, rel=5e-3)


def test_alpha_beta_validation():
    with pytest.raises(ValueError):
        AlphaBeta(-1e-9, 0.0)
    with pytest.raises(ValueError):
        AlphaBeta(0.0, -1e-9)
    with pytest.raises(ValueError):
        AlphaBeta(0.0, 0.0, segment_bytes=0)


# ------------------------------------------------------- training model


def test_amdahl_zero_fraction_changes_nothing():
    r = amdahl_dp(DpTrainingModel(comm_fraction=0.0))
    assert r == AmdahlResult(1.0, 0.0, 0.0)


def test_amdahl_headline_points():
    r20 = amdahl_dp(DpTrainingModel(comm_fraction=0.20))
    assert r20.time_reduction == pytest.approx(0.2 * (1 - 0.151 / 0.352))
    assert abs(r20.time_reduction - 0.114) < 0.01

    r100 = amdahl_dp(DpTrainingModel(comm_fraction=1.0))
    assert r100.time_reduction == pytest.approx(1 - 0.151 / 0.352)
    assert abs(r100.time_reduction - 0.571) < 0.03


def test_amdahl_half_fraction_both_conventions():
    r = amdahl_dp(DpTrainingModel(comm_fraction=0.50))
    assert r.time_reduction == pytest.approx(0.2855, abs=5e-4)
    assert r.speedup == pytest.approx(0.3996, abs=5e-4)


@given(f=st.floats(0.0, 1.0))
def test_amdahl_linearity_and_consistency(f):
    r = amdahl_dp(DpTrainingModel(comm_fraction=f))
    assert r.time_reduction == pytest.approx(f * amdahl_dp(DpTrainingModel(comm_fraction=1.0)).time_reduction)
    assert r.new_iter_fraction == pytest.approx(1.0 - r.time_reduction)
    assert r.speedup >= 0.0


def test_model_validation():
    with pytest.raises(ValueError):
        DpTrainingModel(t_ring_s=0.1, t_inc_s=0.2)
    with pytest.raises(ValueError):
        DpTrainingModel(comm_fraction=1.5)
    with pytest.raises(ValueError):
        DpTrainingModel(t_ring_s=0.0)


def test_sweep_endpoints_and_monotonicity():
    rows = sweep_fig4(DpTrainingModel(), 0.10, 0.50, steps=2)
    assert [r.f for r in rows] == [0.10, 0.50]
    rows = sweep_fig4(DpTrainingModel(), 0.10, 0.50, steps=9)
    assert len(rows) == 9
    assert rows[0].f == pytest.approx(0.10) and rows[-1].f == pytest.approx(0.50)
    reductions = [r.time_reduction for r in rows]
    assert reductions == sorted(reductions)
    speedups = [r.speedup for r in rows]
    assert speedups == sorted(speedups)


def test_sweep_single_step_emits_from_value():
    rows = sweep_fig4(DpTrainingModel(), 0.25, 0.75, steps=1)
    assert len(rows) == 1 and rows[0].f == 0.25


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep_fig4(DpTrainingModel(), 0.5, 0.1, steps=3)
    with pytest.raises(ValueError):
        sweep_fig4(DpTrainingModel(), 0.1, 0.5, steps=0)
    with pytest.raises(ValueError):
        sweep_fig4(DpTrainingModel(), -0.1, 0.5, steps=3)
