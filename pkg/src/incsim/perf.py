"""Analytic cost models.

Alpha-beta transfer time: alpha seconds per message plus beta seconds per
byte. A schedule's time is the sum over rounds of the slowest transfer in
each round. An in-network allreduce streams segments up and back down a
reduction tree:

    time = sum over path hops of (alpha + seg_h * beta)
         + (num_segments - 1) * max over hops of (alpha + seg_h * beta)

where seg_h is the segment size on hop h, width-adjusted on edges that
carry a wider accumulator type. As segments shrink the depth terms vanish
and time approaches (S/seg) * (alpha + seg * beta), independent of depth.

The data-parallel training model treats one training step as a fixed
fraction f of communication (a single gradient allreduce) and 1 - f of
computation. Replacing the ring allreduce (t_ring) with an in-network one
(t_inc) gives

    new_iter_fraction = (1 - f) + f * (t_inc / t_ring)
    time_reduction    = f * (1 - t_inc / t_ring)
    speedup           = 1 / new_iter_fraction - 1

Both speedup conventions are reported because they differ materially
(28.6% time reduction vs 40.0% speedup at f = 0.5 with the default
constants); sweeps emit both columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Sequence

__all__ = [
    "GIB",
    "AlphaBeta",
    "DpTrainingModel",
    "AmdahlResult",
    "SweepRow",
    "schedule_time",
    "pipeline_time",
    "inc_allreduce_time",
    "amdahl_dp",
    "sweep_fig4",
]

GIB = 2 ** 30


@dataclass(frozen=True)
class AlphaBeta:
    """Per-message latency, per-byte cost, and the pipelining segment size."""

    alpha: float
    beta: float
    segment_bytes: int = 65536

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.segment_bytes <= 0:
            raise ValueError("segment_bytes must be > 0")

    def transfer_time(self, nbytes: int) -> float:
        return self.alpha + nbytes * self.beta


def schedule_time(schedule, ab: AlphaBeta) -> float:
    """Sum over rounds of the slowest transfer; empty rounds cost nothing."""
    total = 0.0
    for rnd in schedule.rounds:
        if rnd:
            total += max(ab.transfer_time(tr.nbytes) for tr in rnd)
    return total


def pipeline_time(hop_costs: Sequence[float], num_segments: int) -> float:
    """Streaming pipeline: fill every hop once, then drain at the bottleneck."""
    if num_segments < 1:
        raise ValueError("num_segments must be >= 1")
    costs = list(hop_costs)
    if not costs:
        return 0.0
    return sum(costs) + (num_segments - 1) * max(costs)


def inc_allreduce_time(tree, total_bytes: int, ab: AlphaBeta) -> float:
    """Pipelined up-then-down streaming time over a reduction tree.

    `tree.pipeline_hop_ratios()` supplies the byte multiplier of every hop
    on the deepest leaf-to-root-to-leaf path (wide accumulator edges carry
    proportionally more bytes; the downward result is input-width).
    """
    ratios = tree.pipeline_hop_ratios()
    if not ratios or total_bytes <= 0:
        return 0.0
    nseg = max(1, math.ceil(total_bytes / ab.segment_bytes))
    seg = min(total_bytes, ab.segment_bytes)
    costs = [ab.alpha + seg * r * ab.beta for r in ratios]
    return pipeline_time(costs, nseg)


@dataclass(frozen=True)
class DpTrainingModel:
    """One data-parallel training step with a single gradient allreduce.

    Defaults describe an 8 GiB gradient synchronization taking 0.352 s as
    an endpoint ring and 0.151 s in-network; comm_fraction is the share of
    step time the allreduce occupies. The two timing constants are scenario
    inputs, not derived from alpha-beta (their 2.33x ratio exceeds the pure
    2x bandwidth bound).
    """

    allreduce_bytes: int = 8 * GIB
    t_ring_s: float = 0.352
    t_inc_s: float = 0.151
    comm_fraction: float = 0.20

    def __post_init__(self):
        if self.allreduce_bytes < 0:
            raise ValueError("allreduce_bytes must be >= 0")
        if self.t_ring_s <= 0 or self.t_inc_s <= 0:
            raise ValueError("times must be > 0")
        if self.t_inc_s > self.t_ring_s:
            raise ValueError("t_inc_s must be <= t_ring_s")
        if not 0.0 <= self.comm_fraction <= 1.0:
            raise ValueError("comm_fraction must be in [0, 1]")


@dataclass(frozen=True)
class AmdahlResult:
    new_iter_fraction: float
    time_reduction: float
    speedup: float


def amdahl_dp(model: DpTrainingModel) -> AmdahlResult:
    """End-to-end effect of accelerating only the communication fraction."""
    f = model.comm_fraction
    ratio = model.t_inc_s / model.t_ring_s
    new_fraction = (1.0 - f) + f * ratio
    return AmdahlResult(
        new_iter_fraction=new_fraction,
        time_reduction=f * (1.0 - ratio),
        speedup=1.0 / new_fraction - 1.0,
    )


@dataclass(frozen=True)
class SweepRow:
    f: float
    new_iter_fraction: float
    time_reduction: float
    speedup: float


def sweep_fig4(
    model: DpTrainingModel, f_from: float = 0.10, f_to: float = 0.50, steps: int = 9
) -> List[SweepRow]:
    """Evenly spaced communication-fraction sweep, endpoints inclusive."""
    if not 0.0 <= f_from <= f_to <= 1.0:
        raise ValueError("need 0 <= f_from <= f_to <= 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rows = []
    for i in range(steps):
        f = f_from if steps == 1 else f_from + (f_to - f_from) * i / (steps - 1)
        r = amdahl_dp(replace(model, comm_fraction=f))
        rows.append(SweepRow(f, r.new_iter_fraction, r.time_reduction, r.speedup))
    return rows
