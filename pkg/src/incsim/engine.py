"""Execute collective runs over a topology and account every byte moved.

Three execution methods share one Metrics shape:

* ``endpoint``: a host-level Schedule; every Transfer is routed hop by hop
  through the fat tree and reduced at the receiving host.
* ``core_inc``: switches fold contributions along a ReductionTree.
* ``core_inc_combined_rs_ag``: reduce-scatter and allgather trees run
  concurrently; modeled time is the max of the two phases.

Host-memory accounting covers forwarded payload only: a host that received
a segment in an earlier round and retransmits it pays write + read with a
plain NI (store, then reload to send) but write only when the NI forwards
in place. Control messages and descriptors are not modeled.

Metrics CSV column order (fixed): scenario_id, method, N, elem_type,
total_link_bytes, max_link_bytes, edge_bytes_per_host, hostmem_bytes,
rounds, modeled_time_s, max_abs_err, max_rel_err, digest.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .collectives import (
    CollectiveKind,
    CollectiveSpec,
    Communicator,
    Schedule,
    alltoall_schedule,
    binomial_broadcast_schedule,
    execute_schedule,
    fibonacci_broadcast_schedule,
    pipelined_ring_broadcast_schedule,
    reference_result,
    result_view,
    ring_allgather_schedule,
    ring_allreduce_schedule,
    ring_reduce_scatter_schedule,
    segment_bounds,
    validate_schedule,
)
from .inc_core import (
    ReductionTree,
    assign_precision,
    build_reduction_tree,
    combined_rs_ag_run,
    inc_allgather_run,
    inc_allreduce_run,
    inc_broadcast_run,
    inc_reduce_scatter_run,
)
from .metrics import HostMemLedger, Metrics
from .numerics import (
    AccumulatorPolicy,
    ElemType,
    PolicyKind,
    SparseVec,
    dense_switchover,
    digest_values,
    error_stats,
    quantize,
    sparse_sum,
)
from .perf import AlphaBeta, schedule_time
from .topology import LinkLedger, Topology, record_traffic, route


class Method(Enum):
    """Where the collective work happens."""

    ENDPOINT = "endpoint"
    CORE_INC = "core_inc"
    COMBINED = "core_inc_combined_rs_ag"


class NiMode(Enum):
    """Host NI behavior when forwarding a received payload."""

    PLAIN = "plain"          # store to memory, read back to retransmit
    EDGE_INC = "edge_inc"    # deposit and forward in one pass


class OrderMode(Enum):
    """How switch reductions are ordered across arrivals."""

    FIXED = "fixed"          # buffered child-rank order, arrival invariant
    ARRIVAL = "arrival"      # eager fold in arrival order


_INT_TYPES = (ElemType.INT4, ElemType.INT8, ElemType.INT32)

_DEFAULT_AB = AlphaBeta(alpha=1e-6, beta=1e-9)


@dataclass(frozen=True)
class RunConfig:
    """Everything about a run that is not the collective itself."""

    method: Method = Method.ENDPOINT
    algo: str = "ring"
    ni_mode: NiMode = NiMode.PLAIN
    elem: Optional[ElemType] = None  # None inherits the spec's element type
    policy: AccumulatorPolicy = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    order: OrderMode = OrderMode.FIXED
    seed: int = 0
    ab: AlphaBeta = _DEFAULT_AB
    scenario_id: str = "run"

    def __post_init__(self):
        if self.algo not in ("ring", "binomial", "fibonacci", "pairwise"):
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


class ScheduleValidationError(RuntimeError):
    """A schedule or its outputs failed validation against the oracle."""


@dataclass(frozen=True)
class RunResult:
    metrics: Metrics
    outputs: Dict[int, tuple]


def _endpoint_schedule(spec: CollectiveSpec, cfg: RunConfig) -> Schedule:
    kind, algo = spec.kind, cfg.algo
    if kind is CollectiveKind.BROADCAST:
        if algo == "ring":
            return pipelined_ring_broadcast_schedule(spec, cfg.ab.segment_bytes)
        if algo == "binomial":
            return binomial_broadcast_schedule(spec)
        if algo == "fibonacci":
            return fibonacci_broadcast_schedule(spec)
        raise ValueError(f"algorithm {algo!r} cannot broadcast")
    if kind is CollectiveKind.ALLTOALL:
        if algo in ("ring", "pairwise"):
            return alltoall_schedule(spec)
        raise ValueError(f"algorithm {algo!r} cannot run alltoall")
    if algo != "ring":
        raise ValueError(f"algorithm {algo!r} cannot run {kind.value}")
    builder = {
        CollectiveKind.ALLREDUCE: ring_allreduce_schedule,
        CollectiveKind.ALLGATHER: ring_allgather_schedule,
        CollectiveKind.REDUCE_SCATTER: ring_reduce_scatter_schedule,
    }[kind]
    return builder(spec)


def _synthetic_inputs(spec: CollectiveSpec) -> Dict[int, list]:
    # small distinct integers: exact under both Python and typed arithmetic,
    # so result equivalence in the validator is meaningful
    return {
        r: [r * spec.elem_count + j + 1 for j in range(spec.elem_count)]
        for r in range(spec.nranks)
    }


def _quantized_inputs(spec: CollectiveSpec, cfg: RunConfig, inputs: Dict) -> Dict[int, list]:
    if set(inputs) != set(range(spec.nranks)):
        raise ValueError("inputs must cover ranks 0..N-1 exactly")
    out = {}
    for r in range(spec.nranks):
        vec = inputs[r]
        if len(vec) != spec.elem_count:
            raise ValueError(f"rank {r} vector length {len(vec)} != {spec.elem_count}")
        out[r] = [quantize(cfg.elem, v) for v in vec]
    return out


def _exact_oracle(spec: CollectiveSpec, qinputs: Dict[int, list]) -> Dict[int, tuple]:
    """reference_result with exact float sums (fsum) for reduction kinds."""
    if spec.kind in (CollectiveKind.ALLREDUCE, CollectiveKind.REDUCE_SCATTER):
        n = spec.nranks
        total = [math.fsum(qinputs[r][j] for r in range(n)) for j in range(spec.elem_count)]
        if all(float(v).is_integer() for row in qinputs.values() for v in row):
            total = [int(v) for v in total]
        if spec.kind is CollectiveKind.ALLREDUCE:
            return {r: tuple(total) for r in range(n)}
        bounds = segment_bounds(spec.elem_count, n)
        return {r: tuple(total[bounds[r][0]: bounds[r][1]]) for r in range(n)}
    return reference_result(spec, qinputs)


def _verify_exact(spec: CollectiveSpec, cfg: RunConfig, outputs: Dict, oracle: Dict) -> None:
    """Integer arithmetic is exact mod 2^bits, so outputs must match the
    wrapped oracle bit for bit; a mismatch means the execution is wrong."""
    if cfg.elem not in _INT_TYPES:
        return
    for r, expect in oracle.items():
        got = outputs[r]
        want = tuple(quantize(cfg.elem, v) for v in expect)
        if tuple(got) != want:
            raise ScheduleValidationError(
                f"rank {r} output diverges from the reference result"
            )


def _error_stats(spec: CollectiveSpec, outputs: Dict, oracle: Dict):
    worst_abs = worst_rel = 0.0
    for r in oracle:
        stats = error_stats(outputs[r], oracle[r])
        worst_abs = max(worst_abs, stats.max_abs)
        worst_rel = max(worst_rel, stats.max_rel)
    return worst_abs, worst_rel


def _run_endpoint(topo: Topology, spec: CollectiveSpec, cfg: RunConfig, inputs: Dict) -> RunResult:
    schedule = _endpoint_schedule(spec, cfg)
    report = validate_schedule(spec, schedule, _synthetic_inputs(spec))
    if not report.ok:
        raise ScheduleValidationError(report.first_problem() or "schedule invalid")

    qinputs = _quantized_inputs(spec, cfg, inputs)
    link = LinkLedger()
    hostmem = HostMemLedger()
    hosts = spec.comm.hosts
    # segments a rank held at the start of the current round, i.e. received
    # in a strictly earlier round; sending one of those is a forward
    received_before: Dict[int, set] = {r: set() for r in range(spec.nranks)}
    pending: Dict[int, set] = {r: set() for r in range(spec.nranks)}
    cur_round = 0

    def observe(ridx: int, t) -> None:
        nonlocal cur_round
        if ridx != cur_round:
            for r, segs in pending.items():
                received_before[r] |= segs
                segs.clear()
            cur_round = ridx
        record_traffic(link, route(topo, hosts[t.src], hosts[t.dst]), t.nbytes)
        if t.segment in received_before[t.src]:
            hostmem.record_write(hosts[t.src], t.nbytes)
            if cfg.ni_mode is NiMode.PLAIN:
                hostmem.record_read(hosts[t.src], t.nbytes)
        pending[t.dst].add(t.segment)

    state = execute_schedule(spec, schedule, qinputs, elem=cfg.elem, observer=observe)
    outputs = result_view(spec, schedule, state)

    oracle = _exact_oracle(spec, qinputs)
    _verify_exact(spec, cfg, outputs, oracle)
    max_abs, max_rel = _error_stats(spec, outputs, oracle)

    edge_per_host = max(
        (link.bytes_on((h, topo.host_leaf[h])) + link.bytes_on((topo.host_leaf[h], h)))
        for h in hosts
    )
    metrics = Metrics(
        scenario_id=cfg.scenario_id,
        method=Method.ENDPOINT.value,
        nranks=spec.nranks,
        elem_type=cfg.elem.value,
        link=link,
        hostmem=hostmem,
        edge_bytes_per_host=edge_per_host,
        rounds=schedule.num_rounds,
        modeled_time_s=schedule_time(schedule, cfg.ab),
        max_abs_err=max_abs,
        max_rel_err=max_rel,
        digest=digest_values(cfg.elem, outputs[0]),
    )
    return RunResult(metrics=metrics, outputs=outputs)


def _build_tree(topo: Topology, spec: CollectiveSpec, cfg: RunConfig) -> ReductionTree:
    tree = build_reduction_tree(topo, spec.comm)
    return assign_precision(tree, cfg.elem, cfg.policy)


def _run_core_inc(topo: Topology, spec: CollectiveSpec, cfg: RunConfig, inputs: Dict) -> RunResult:
    tree = _build_tree(topo, spec, cfg)
    qinputs = _quantized_inputs(spec, cfg, inputs)
    mode = "child_order" if cfg.order is OrderMode.FIXED else "arrival_order"
    kind = spec.kind
    if kind is CollectiveKind.ALLREDUCE:
        out = inc_allreduce_run(
            topo, tree, qinputs, ab=cfg.ab, reduce_mode=mode,
            arrival_seed=cfg.seed, scenario_id=cfg.scenario_id,
        )
    elif kind is CollectiveKind.REDUCE_SCATTER:
        out = inc_reduce_scatter_run(
            topo, tree, qinputs, ab=cfg.ab, reduce_mode=mode,
            arrival_seed=cfg.seed, scenario_id=cfg.scenario_id,
        )
    elif kind is CollectiveKind.ALLGATHER:
        out = inc_allgather_run(topo, tree, qinputs, scenario_id=cfg.scenario_id)
    elif kind is CollectiveKind.BROADCAST:
        out = inc_broadcast_run(
            topo, tree, qinputs, source_rank=spec.root, scenario_id=cfg.scenario_id,
        )
    else:
        raise ValueError("alltoall has no switch-tree implementation")
    _verify_exact(spec, cfg, out.outputs, _exact_oracle(spec, qinputs))
    return RunResult(metrics=out.metrics, outputs=out.outputs)


def _run_combined(topo: Topology, spec: CollectiveSpec, cfg: RunConfig, inputs: Dict) -> RunResult:
    if spec.kind is not CollectiveKind.ALLREDUCE:
        raise ValueError("the combined method implements allreduce only")
    if spec.elem_count % spec.nranks:
        raise ValueError("element count must divide evenly into shards")
    tree = _build_tree(topo, spec, cfg)
    qinputs = _quantized_inputs(spec, cfg, inputs)
    out = combined_rs_ag_run(topo, tree, qinputs, ab=cfg.ab, scenario_id=cfg.scenario_id)
    _verify_exact(spec, cfg, out.ag_outputs, _exact_oracle(spec, qinputs))
    return RunResult(metrics=out.metrics, outputs=out.ag_outputs)


def run(topo: Topology, spec: CollectiveSpec, cfg: RunConfig, inputs: Dict) -> RunResult:
    """Execute one collective and return its Metrics plus per-rank outputs."""
    if cfg.elem is None:
        cfg = replace(cfg, elem=spec.elem_type)
    elif spec.elem_type is not cfg.elem:
        raise ValueError("spec elem_type and run config elem must agree")
    for h in spec.comm.hosts:
        if h not in topo.host_leaf:
            raise KeyError(f"host {h} not in topology")
    dispatch = {
        Method.ENDPOINT: _run_endpoint,
        Method.CORE_INC: _run_core_inc,
        Method.COMBINED: _run_combined,
    }
    return dispatch[cfg.method](topo, spec, cfg, inputs)


# --------------------------------------------------------------- comparison


def _ratio(first: float, current: float) -> float:
    if first == current:
        return 1.0
    if current == 0:
        return math.inf
    return first / current


@dataclass(frozen=True)
class MethodComparison:
    """Per-config Metrics plus ratios of the first config to each one."""

    rows: Tuple[Metrics, ...]
    ratios: Tuple[Dict[str, float], ...]  # keys: the four traffic quantities


_RATIO_FIELDS = (
    "total_link_bytes",
    "max_link_bytes",
    "edge_bytes_per_host",
    "hostmem_bytes",
)


def compare_methods(
    topo: Topology, spec: CollectiveSpec, cfgs: Sequence[RunConfig], inputs: Dict
) -> MethodComparison:
    """Run every config on the same inputs; ratios are first/current."""
    if len(cfgs) < 2:
        raise ValueError("need at least two configs to compare")
    rows = tuple(run(topo, spec, cfg, inputs).metrics for cfg in cfgs)
    base = rows[0]
    ratios = tuple(
        {f: _ratio(getattr(base, f), getattr(row, f)) for f in _RATIO_FIELDS}
        for row in rows
    )
    return MethodComparison(rows=rows, ratios=ratios)


# ---------------------------------------------------------- reproducibility


@dataclass(frozen=True)
class ReproReport:
    """Digest stability across arrival interleavings and host mappings."""

    trials: int
    distinct_digests: Tuple[str, ...]
    intra_ok: bool                      # single digest across all trials
    inter_same_shape: Optional[bool]    # digest preserved under a shape-
    #                                     preserving host remapping (None if
    #                                     the topology offers no such remap)
    inter_diff_shape: Optional[bool]    # informational: digest match under a
    #                                     shape-changing remapping
    notes: Tuple[str, ...] = ()


def _tree_shape(topo: Topology, hosts: Tuple[str, ...]):
    return build_reduction_tree(topo, Communicator(hosts)).shape_signature()


def _remap_candidates(topo: Topology, hosts: Tuple[str, ...]):
    """Cyclic shifts of the host index space, coarsest stride first."""
    total = len(topo.hosts)
    per_leaf = topo.params.hosts_per_leaf
    idxs = [int(h[1:]) for h in hosts]
    seen = {tuple(hosts)}
    for stride in range(per_leaf, total, per_leaf):
        cand = tuple(f"h{(i + stride) % total}" for i in idxs)
        if cand not in seen:
            seen.add(cand)
            yield cand


def _packed_candidate(spec: CollectiveSpec) -> Tuple[str, ...]:
    return tuple(f"h{i}" for i in range(spec.nranks))


def repro_check(
    topo: Topology,
    spec: CollectiveSpec,
    cfg: RunConfig,
    inputs: Dict,
    trials: int = 10,
    seed: int = 0,
) -> ReproReport:
    """Re-run with shuffled arrival interleavings and remapped hosts.

    Intra-job: the digest must not depend on arrival order when the
    reduction order is fixed. Inter-job: remapping ranks onto other hosts
    preserves the digest iff the reduction tree keeps its shape; a
    shape-changing remap may legitimately change the fold order, so a
    mismatch there is reported, not failed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    digests = []
    for _ in range(trials):
        trial_cfg = replace(cfg, seed=rng.getrandbits(32))
        digests.append(run(topo, spec, trial_cfg, inputs).metrics.digest)
    distinct = tuple(sorted(set(digests)))
    base_digest = digests[0]

    notes: List[str] = []
    inter_same: Optional[bool] = None
    inter_diff: Optional[bool] = None
    base_shape = _tree_shape(topo, spec.comm.hosts)
    same_shape_map = diff_shape_map = None
    for cand in _remap_candidates(topo, spec.comm.hosts):
        shape = _tree_shape(topo, cand)
        if shape == base_shape and same_shape_map is None:
            same_shape_map = cand
        elif shape != base_shape and diff_shape_map is None:
            diff_shape_map = cand
        if same_shape_map and diff_shape_map:
            break
    if diff_shape_map is None:
        packed = _packed_candidate(spec)
        if packed != spec.comm.hosts and _tree_shape(topo, packed) != base_shape:
            diff_shape_map = packed

    def digest_for(hosts: Tuple[str, ...]) -> str:
        respec = CollectiveSpec(
            kind=spec.kind, comm=Communicator(hosts),
            elem_count=spec.elem_count, elem_type=spec.elem_type,
            root=spec.root,
        )
        return run(topo, respec, replace(cfg, seed=seed), inputs).metrics.digest

    if same_shape_map is not None:
        inter_same = digest_for(same_shape_map) == base_digest
        notes.append(f"same-shape remap onto {same_shape_map[0]}..")
    else:
        notes.append("no shape-preserving remap available")
    if diff_shape_map is not None:
        inter_diff = digest_for(diff_shape_map) == base_digest
        notes.append(f"shape-changing remap onto {diff_shape_map[0]}..")
    else:
        notes.append("no shape-changing remap available")

    return ReproReport(
        trials=trials,
        distinct_digests=distinct,
        intra_ok=len(distinct) == 1,
        inter_same_shape=inter_same,
        inter_diff_shape=inter_diff,
        notes=tuple(notes),
    )


# ------------------------------------------------------------ sparse profile


@dataclass(frozen=True)
class LevelStat:
    level: int          # 0 = host inputs, increasing toward the root
    max_nnz: int
    density: float
    switchover: bool    # dense encoding beats sparse somewhere on this level


@dataclass(frozen=True)
class SparseProfile:
    n: int
    levels: Tuple[LevelStat, ...]
    switchover_level: Optional[int]      # first level where dense wins
    root_nnz: int
    root_density: float
    core_volume_bytes: int               # tree reduce with min-size encoding
    sharded_volume_bytes: int            # index-sharded endpoint exchange
    index_bytes: int
    value_bytes: int


def sparse_tree_profile(
    tree: ReductionTree,
    sparse_inputs: Dict[int, SparseVec],
    index_bytes: int = 4,
    value_bytes: int = 4,
) -> SparseProfile:
    """Fill-in profile up the tree plus volume vs index-sharded endpoints.

    Core volume charges each up edge the smaller of the sparse and dense
    encodings of the partial crossing it (fill-in only grows upward, so
    this is a sparse-then-dense scheme) and the result once per tree edge
    downward. The sharded scheme sends every stored value to its index
    owner once and distributes the result to the other N-1 ranks;
    self-owned values are not discounted.
    """
    comm = tree.comm
    if set(sparse_inputs) != set(range(comm.size)):
        raise ValueError("sparse inputs must cover ranks 0..N-1 exactly")
    n = next(iter(sparse_inputs.values())).n
    for r, vec in sparse_inputs.items():
        if vec.n != n:
            raise ValueError(f"rank {r} domain length {vec.n} != {n}")

    partial: Dict[str, SparseVec] = {}
    level: Dict[str, int] = {}
    for host in comm.hosts:
        partial[host] = sparse_inputs[tree.rank_of(host)]
        level[host] = 0

    def fill(node: str) -> SparseVec:
        if node in partial:
            return partial[node]
        merged: Optional[SparseVec] = None
        for child in tree.children[node]:
            vec = fill(child)
            merged = vec if merged is None else sparse_sum(merged, vec)
        partial[node] = merged
        level[node] = 1 + max(level[c] for c in tree.children[node])
        return merged

    root_vec = fill(tree.root)

    by_level: Dict[int, List[int]] = {}
    for node, vec in partial.items():
        by_level.setdefault(level[node], []).append(vec.nnz)
    levels = []
    switchover_level = None
    for lvl in sorted(by_level):
        nnzs = by_level[lvl]
        trig = any(dense_switchover(n, z, index_bytes, value_bytes) for z in nnzs)
        levels.append(
            LevelStat(
                level=lvl,
                max_nnz=max(nnzs),
                density=max(nnzs) / n if n else 0.0,
                switchover=trig,
            )
        )
        if trig and switchover_level is None:
            switchover_level = lvl

    def enc(vec: SparseVec) -> int:
        return min(vec.encoded_bytes(index_bytes, value_bytes), n * value_bytes)

    edges = tree.tree_edges()
    core = sum(enc(partial[child]) for child, _ in edges)
    core += len(edges) * enc(root_vec)
    sharded = sum(vec.encoded_bytes(index_bytes, value_bytes) for vec in sparse_inputs.values())
    sharded += (comm.size - 1) * enc(root_vec)

    return SparseProfile(
        n=n,
        levels=tuple(levels),
        switchover_level=switchover_level,
        root_nnz=root_vec.nnz,
        root_density=root_vec.density,
        core_volume_bytes=core,
        sharded_volume_bytes=sharded,
        index_bytes=index_bytes,
        value_bytes=value_bytes,
    )
