"""In-network collectives over switch reduction trees.

A reduction tree spans the participant hosts and the switches between them
and the root. The root is the lowest-level switch whose subtree contains
every participant, ties broken by lowest switch id; with level-major ids
that is slot 0 of the enclosing group, so the whole tree runs through
slot-0 switches and every tree edge is a physical link. A switch with two
or more tree children accumulates; a switch with one child passes through.

Reduction is deterministic: each switch buffers its children's
contributions and folds them in ascending child-rank order once all have
arrived, so results are independent of message arrival order. The
alternative arrival-order mode folds eagerly as payloads arrive and exists
to demonstrate the nondeterminism that buffering removes.

Precision along edges is set by an AccumulatorPolicy. Under
wide_from_first_accumulating_switch, the edge leaving a node carries the
wide type exactly when that node's subtree contains an accumulating
switch: contributions stay narrow until they are first combined, partial
sums travel wide, and the root casts back down before fanning the result
out. Per participant, an in-network allreduce moves S bytes up and S bytes
down its host link; a ring endpoint allreduce moves 2(N-1)/N * S each way.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .collectives import Communicator, segment_bounds
from .metrics import HostMemLedger, Metrics
from .numerics import (
    AccumulatorPolicy,
    ElemType,
    ErrorStats,
    PolicyKind,
    digest_values,
    error_stats,
    quantize,
    scalar_add,
)
from .perf import AlphaBeta, inc_allreduce_time
from .topology import LinkLedger, NodeId, Topology

__all__ = [
    "SwitchRole",
    "Phase",
    "ReductionTree",
    "SwitchResources",
    "CapacityError",
    "SwitchTreeState",
    "ContributeEffect",
    "DuplicateContributionError",
    "UnregisteredChildError",
    "build_reduction_tree",
    "allocate_tree",
    "assign_precision",
    "inc_contribute",
    "IncOutcome",
    "CombinedOutcome",
    "inc_allreduce_run",
    "inc_broadcast_run",
    "inc_allgather_run",
    "inc_reduce_scatter_run",
    "combined_rs_ag_run",
]


class SwitchRole(Enum):
    ACCUMULATING = "accumulating"
    PASS_THROUGH = "pass_through"


class Phase(Enum):
    REDUCING = "reducing"
    BROADCASTING = "broadcasting"
    IDLE = "idle"


@dataclass(frozen=True)
class ReductionTree:
    """Spanning tree for one communicator: hosts at the leaves, switches above.

    `children` lists are ordered by the smallest participant rank in each
    child's subtree, which fixes the reduction order for any two jobs whose
    trees have the same shape. `edge_types` tags the upward direction of
    every (child, parent) edge once assign_precision has run; the downward
    direction always carries the input type (the root downcasts first).
    """

    tree_id: str
    root: NodeId
    comm: Communicator
    parent: dict
    children: dict
    roles: dict
    edge_types: dict = field(default_factory=dict)
    input_type: Optional[ElemType] = None
    policy: Optional[AccumulatorPolicy] = None
    root_downcast: bool = False

    @property
    def assigned(self) -> bool:
        return self.input_type is not None

    def require_assigned(self) -> None:
        if not self.assigned:
            raise RuntimeError("tree has no edge widths; run assign_precision first")

    def switches(self) -> tuple:
        return tuple(sorted(self.roles, key=lambda s: int(s[1:])))

    def tree_edges(self) -> tuple:
        """(child, parent) pairs, hosts first in rank order, then switches."""
        hosts = [(h, self.parent[h]) for h in self.comm.hosts]
        sws = [(s, self.parent[s]) for s in self.switches() if s in self.parent]
        return tuple(hosts + sws)

    def up_path(self, host: NodeId) -> tuple:
        path = [host]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return tuple(path)

    def depth(self) -> int:
        return max(len(self.up_path(h)) - 1 for h in self.comm.hosts)

    def rank_of(self, host: NodeId) -> int:
        return self.comm.hosts.index(host)

    def acc_type(self, switch: NodeId) -> ElemType:
        """Type a switch accumulates and emits in: its up-edge type."""
        self.require_assigned()
        up = self.parent.get(switch)
        if up is not None:
            return self.edge_types[(switch, up)]
        return self.policy.wide_type if self.root_downcast else self.input_type

    def pipeline_hop_ratios(self) -> tuple:
        """Byte multipliers along the deepest host's up path, then back down."""
        self.require_assigned()
        deepest = max(self.comm.hosts, key=lambda h: len(self.up_path(h)))
        path = self.up_path(deepest)
        in_bits = self.input_type.width_bits
        up = [self.edge_types[(a, b)].width_bits / in_bits for a, b in zip(path, path[1:])]
        down = [1.0] * len(up)
        return tuple(up + down)

    def shape_signature(self) -> tuple:
        """Label-free tree shape; equal signatures mean equal fold structure."""

        def sig(node):
            kids = self.children.get(node, ())
            if not kids:
                return "h"
            return tuple(sig(c) for c in kids)

        return sig(self.root)

    def to_json(self) -> str:
        doc = {
            "id": self.tree_id,
            "root": self.root,
            "hosts": list(self.comm.hosts),
            "roles": {s: self.roles[s].value for s in self.switches()},
            "edges": [
                {
                    "child": c,
                    "parent": p,
                    "up_type": self.edge_types[(c, p)].value if self.assigned else None,
                }
                for c, p in self.tree_edges()
            ],
            "input_type": self.input_type.value if self.assigned else None,
            "root_downcast": self.root_downcast,
        }
        return json.dumps(doc, indent=2)


def build_reduction_tree(topo: Topology, comm: Communicator) -> ReductionTree:
    """Root at the lowest-level all-participant ancestor, lowest id on ties."""
    for h in comm.hosts:
        if h not in topo.host_leaf:
            raise KeyError(f"unknown host {h!r}")
    leaf_idx = {h: int(topo.host_leaf[h][1:]) for h in comm.hosts}
    leaves = set(leaf_idx.values())

    root_level = 0
    for lvl in range(topo.params.levels):
        if len({l // topo.leaves_per_subtree[lvl] for l in leaves}) == 1:
            root_level = lvl
            break
    else:
        raise ValueError("participants do not share a subtree; malformed topology")
    group = next(iter(leaves)) // topo.leaves_per_subtree[root_level]
    root = topo.switch_id(root_level, group, 0)

    parent: Dict[NodeId, NodeId] = {}
    kids: Dict[NodeId, List[NodeId]] = {}
    for h in comm.hosts:
        # the root sits at slot 0, so the unique downward path to each leaf
        # stays in slot 0 of every intermediate group
        path = [h]
        for lvl in range(root_level + 1):
            path.append(topo.switch_id(lvl, leaf_idx[h] // topo.leaves_per_subtree[lvl], 0))
        for child, par in zip(path, path[1:]):
            if child in parent:
                if parent[child] != par:
                    raise AssertionError("inconsistent tree paths")
                break
            parent[child] = par
            kids.setdefault(par, []).append(child)

    min_rank: Dict[NodeId, int] = {h: r for r, h in enumerate(comm.hosts)}

    def fill_min_rank(node: NodeId) -> int:
        if node not in min_rank:
            min_rank[node] = min(fill_min_rank(c) for c in kids[node])
        return min_rank[node]

    fill_min_rank(root)
    children = {node: tuple(sorted(cs, key=lambda c: min_rank[c])) for node, cs in kids.items()}
    roles = {
        s: SwitchRole.ACCUMULATING if len(children.get(s, ())) >= 2 else SwitchRole.PASS_THROUGH
        for s in set(parent.values()) | ({root} if root not in parent else set())
    }

    h = hashlib.blake2b(digest_size=6)
    h.update(root.encode())
    for c, p in sorted(parent.items()):
        h.update(f"{c}>{p}".encode())
    return ReductionTree(
        tree_id=f"t{h.hexdigest()}",
        root=root,
        comm=comm,
        parent=parent,
        children=children,
        roles=roles,
    )


class CapacityError(RuntimeError):
    def __init__(self, switch: NodeId, capacity: int):
        self.switch = switch
        self.capacity = capacity
        super().__init__(f"switch {switch} is saturated (capacity {capacity} trees)")


@dataclass
class SwitchResources:
    """Per-switch budget of concurrently installed trees."""

    capacity: int
    allocations: Dict[str, frozenset] = field(default_factory=dict)
    load: Dict[NodeId, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")

    def allocate(self, tree: ReductionTree) -> None:
        """Reserve a slot on every tree switch, all or nothing."""
        if tree.tree_id in self.allocations:
            raise ValueError(f"tree {tree.tree_id} already allocated")
        switches = tree.switches()
        for s in switches:
            if self.load.get(s, 0) >= self.capacity:
                raise CapacityError(s, self.capacity)
        for s in switches:
            self.load[s] = self.load.get(s, 0) + 1
        self.allocations[tree.tree_id] = frozenset(switches)

    def release(self, tree_id: str) -> None:
        switches = self.allocations.pop(tree_id)
        for s in switches:
            self.load[s] -= 1


def allocate_tree(res: SwitchResources, tree: ReductionTree) -> None:
    res.allocate(tree)


def assign_precision(
    tree: ReductionTree, input_type: ElemType, policy: AccumulatorPolicy
) -> ReductionTree:
    """Return a copy of the tree with an upward element type on every edge."""
    policy.validate_against(input_type)

    has_acc: Dict[NodeId, bool] = {}

    def subtree_has_accumulator(node: NodeId) -> bool:
        if node not in has_acc:
            own = tree.roles.get(node) is SwitchRole.ACCUMULATING
            has_acc[node] = own or any(
                subtree_has_accumulator(c) for c in tree.children.get(node, ())
            )
        return has_acc[node]

    any_acc = subtree_has_accumulator(tree.root)
    edge_types = {}
    for child, par in tree.tree_edges():
        if policy.kind in (PolicyKind.SAME_AS_INPUT, PolicyKind.ENDPOINT_SHARDED):
            wide = False
        elif policy.kind is PolicyKind.WIDE_EVERYWHERE:
            wide = child not in tree.comm.hosts and any_acc
        else:  # WIDE_FROM_FIRST_ACCUMULATING_SWITCH
            wide = subtree_has_accumulator(child)
        edge_types[(child, par)] = policy.wide_type if wide else input_type
    downcast = any(t is not input_type for t in edge_types.values()) or (
        any_acc and policy.kind in (PolicyKind.WIDE_EVERYWHERE, PolicyKind.WIDE_FROM_FIRST_ACCUMULATING_SWITCH)
    )
    return replace(
        tree, edge_types=edge_types, input_type=input_type, policy=policy, root_downcast=downcast
    )


class DuplicateContributionError(ValueError):
    pass


class UnregisteredChildError(KeyError):
    pass


@dataclass(frozen=True)
class ContributeEffect:
    forwarded: bool
    payload: Optional[tuple] = None


class SwitchTreeState:
    """Per-switch, per-tree reduction state for one collective execution."""

    def __init__(
        self,
        switch: NodeId,
        children: Sequence[NodeId],
        acc_type: ElemType,
        reduce_mode: str = "child_order",
    ):
        if reduce_mode not in ("child_order", "arrival_order"):
            raise ValueError(f"unknown reduce_mode {reduce_mode!r}")
        self.switch = switch
        self.children = tuple(children)
        self.acc_type = acc_type
        self.reduce_mode = reduce_mode
        self.phase = Phase.REDUCING
        self._pending: Dict[int, Dict[NodeId, tuple]] = {}
        self._eager: Dict[int, list] = {}

    def contribute(self, child: NodeId, segment: int, payload: Sequence) -> ContributeEffect:
        if child not in self.children:
            raise UnregisteredChildError(f"{child} is not a child of {self.switch}")
        if self.phase is not Phase.REDUCING:
            raise RuntimeError(f"switch {self.switch} is not reducing (phase {self.phase.value})")
        seen = self._pending.setdefault(segment, {})
        if child in seen:
            raise DuplicateContributionError(
                f"duplicate contribution from {child} for segment {segment}"
            )
        cast_payload = tuple(quantize(self.acc_type, v) for v in payload)
        seen[child] = cast_payload
        if self.reduce_mode == "arrival_order":
            acc = self._eager.get(segment)
            if acc is None:
                self._eager[segment] = list(cast_payload)
            else:
                for j, v in enumerate(cast_payload):
                    acc[j] = scalar_add(self.acc_type, acc[j], v)
        if len(seen) < len(self.children):
            return ContributeEffect(False)
        if self.reduce_mode == "arrival_order":
            out = tuple(self._eager.pop(segment))
        else:
            ordered = [seen[c] for c in self.children]
            acc = list(ordered[0])
            for vec in ordered[1:]:
                for j, v in enumerate(vec):
                    acc[j] = scalar_add(self.acc_type, acc[j], v)
            out = tuple(acc)
        del self._pending[segment]
        return ContributeEffect(True, out)


def inc_contribute(
    state: SwitchTreeState, child: NodeId, segment: int, payload: Sequence
) -> ContributeEffect:
    return state.contribute(child, segment, payload)


# ----------------------------------------------------------------- runs


@dataclass
class IncOutcome:
    outputs: dict
    metrics: Metrics
    switch_partials: dict  # switch -> value it forwarded up (root: pre-downcast)


@dataclass
class CombinedOutcome:
    rs_outputs: dict
    ag_outputs: dict
    metrics: Metrics


def _check_inputs(tree: ReductionTree, inputs: dict) -> int:
    n = tree.comm.size
    lengths = set()
    for r in range(n):
        if r not in inputs:
            raise ValueError(f"missing input for rank {r}")
        lengths.add(len(inputs[r]))
    if len(lengths) != 1:
        raise ValueError("participant vectors must have equal length")
    return lengths.pop()


def _metrics(tree, scenario_id, method, ledger, rounds, time_s, err, digest, extras=None) -> Metrics:
    edge = 0
    for h in tree.comm.hosts:
        leaf = tree.parent[h]
        edge = max(edge, ledger.bytes_on((h, leaf)) + ledger.bytes_on((leaf, h)))
    return Metrics(
        scenario_id=scenario_id,
        method=method,
        nranks=tree.comm.size,
        elem_type=tree.input_type.value,
        link=ledger,
        hostmem=HostMemLedger(),
        edge_bytes_per_host=edge,
        rounds=rounds,
        modeled_time_s=time_s,
        max_abs_err=err.max_abs,
        max_rel_err=err.max_rel,
        digest=digest,
        extras=extras or {},
    )


def _reduce_up(
    tree: ReductionTree,
    q_inputs: dict,
    ledger: LinkLedger,
    reduce_mode: str,
    arrival_seed: Optional[int],
) -> Tuple[tuple, dict]:
    """Drive contributions up the tree; returns (root value, switch partials).

    Events model in-flight payloads. A seeded shuffle of the initial host
    sends varies the arrival interleaving at every switch; with the default
    buffered child-order reduction the result is interleaving-invariant.
    """
    elems = len(next(iter(q_inputs.values())))
    states = {
        s: SwitchTreeState(s, tree.children[s], tree.acc_type(s), reduce_mode)
        for s in tree.switches()
    }
    events = [(h, tree.parent[h], q_inputs[tree.rank_of(h)]) for h in tree.comm.hosts]
    if arrival_seed is not None:
        random.Random(arrival_seed).shuffle(events)
    partials: Dict[NodeId, tuple] = {}
    root_value = None
    i = 0
    while i < len(events):
        child, sw, payload = events[i]
        i += 1
        ledger.record_link((child, sw), tree.edge_types[(child, sw)].nbytes(elems))
        effect = states[sw].contribute(child, 0, payload)
        if effect.forwarded:
            partials[sw] = effect.payload
            if sw == tree.root:
                root_value = effect.payload
            else:
                events.append((sw, tree.parent[sw], effect.payload))
    if root_value is None:
        raise AssertionError("reduction did not reach the root")
    for s in states.values():
        s.phase = Phase.BROADCASTING
    return root_value, partials


def _broadcast_down(tree: ReductionTree, ledger: LinkLedger, payload_bytes) -> None:
    """Charge each downward tree edge once; payload_bytes maps child -> bytes."""
    for child, par in tree.tree_edges():
        ledger.record_link((par, child), payload_bytes(child))


def inc_allreduce_run(
    topo: Topology,
    tree: ReductionTree,
    inputs: dict,
    ab: Optional[AlphaBeta] = None,
    reduce_mode: str = "child_order",
    arrival_seed: Optional[int] = None,
    scenario_id: str = "inc-allreduce",
) -> IncOutcome:
    """Reduce up the tree, downcast at the root, multicast back down.

    Every participant sends its S bytes once and receives the S-byte result
    once; switch-to-switch edges carry the width their assigned type
    implies. Link accounting covers every edge traversal; host memory is
    untouched (payloads never round-trip through a participant).
    """
    tree.require_assigned()
    elems = _check_inputs(tree, inputs)
    t_in = tree.input_type
    q_inputs = {r: tuple(quantize(t_in, v) for v in inputs[r]) for r in range(tree.comm.size)}
    ledger = LinkLedger()
    root_value, partials = _reduce_up(tree, q_inputs, ledger, reduce_mode, arrival_seed)
    result = tuple(quantize(t_in, v) for v in root_value)
    _broadcast_down(tree, ledger, lambda child: t_in.nbytes(elems))
    outputs = {r: result for r in range(tree.comm.size)}
    exact = [math.fsum(float(q_inputs[r][j]) for r in range(tree.comm.size)) for j in range(elems)]
    err = error_stats(result, exact) if elems else ErrorStats(0.0, 0.0)
    time_s = inc_allreduce_time(tree, t_in.nbytes(elems), ab) if ab else 0.0
    metrics = _metrics(
        tree, scenario_id, "core_inc", ledger, 2 * tree.depth(), time_s,
        err, digest_values(t_in, result),
    )
    return IncOutcome(outputs, metrics, partials)


def inc_broadcast_run(
    topo: Topology,
    tree: ReductionTree,
    inputs: dict,
    source_rank: int = 0,
    scenario_id: str = "inc-broadcast",
) -> IncOutcome:
    """Send the source vector up to the root, then replicate it downward.

    Only edges on paths to ranks other than the source carry downward
    traffic; a single participant generates no traffic at all.
    """
    tree.require_assigned()
    elems = _check_inputs(tree, inputs)
    t_in = tree.input_type
    if not 0 <= source_rank < tree.comm.size:
        raise ValueError("source_rank out of range")
    result = tuple(quantize(t_in, v) for v in inputs[source_rank])
    ledger = LinkLedger()
    nbytes = t_in.nbytes(elems)
    src_host = tree.comm.hosts[source_rank]
    if tree.comm.size > 1:
        path = tree.up_path(src_host)
        for a, b in zip(path, path[1:]):
            ledger.record_link((a, b), nbytes)
        down_edges = set()
        for h in tree.comm.hosts:
            if h == src_host:
                continue
            hp = tree.up_path(h)
            down_edges.update(zip(hp[1:], hp))  # (parent, child) pairs
        for par, child in sorted(down_edges):
            ledger.record_link((par, child), nbytes)
    outputs = {r: result for r in range(tree.comm.size)}
    metrics = _metrics(
        tree, scenario_id, "core_inc", ledger, 2 * tree.depth(), 0.0,
        ErrorStats(0.0, 0.0), digest_values(t_in, result),
    )
    return IncOutcome(outputs, metrics, {})


def inc_allgather_run(
    topo: Topology,
    tree: ReductionTree,
    inputs: dict,
    scenario_id: str = "inc-allgather",
) -> IncOutcome:
    """Each contribution flows up once; the concatenation replicates down.

    An upward edge is traversed once per participant beneath it; every
    downward edge carries the full N*S result exactly once.
    """
    tree.require_assigned()
    elems = _check_inputs(tree, inputs)
    t_in = tree.input_type
    n = tree.comm.size
    q_inputs = {r: tuple(quantize(t_in, v) for v in inputs[r]) for r in range(n)}
    ledger = LinkLedger()
    nbytes = t_in.nbytes(elems)
    for h in tree.comm.hosts:
        path = tree.up_path(h)
        for a, b in zip(path, path[1:]):
            ledger.record_link((a, b), nbytes)
    flat = tuple(v for r in range(n) for v in q_inputs[r])
    _broadcast_down(tree, ledger, lambda child: t_in.nbytes(n * elems))
    outputs = {r: flat for r in range(n)}
    metrics = _metrics(
        tree, scenario_id, "core_inc", ledger, 2 * tree.depth(), 0.0,
        ErrorStats(0.0, 0.0), digest_values(t_in, flat),
    )
    return IncOutcome(outputs, metrics, {})


def inc_reduce_scatter_run(
    topo: Topology,
    tree: ReductionTree,
    inputs: dict,
    ab: Optional[AlphaBeta] = None,
    reduce_mode: str = "child_order",
    arrival_seed: Optional[int] = None,
    scenario_id: str = "inc-reduce-scatter",
) -> IncOutcome:
    """Reduce the full vector up the tree, deliver each rank its shard."""
    tree.require_assigned()
    elems = _check_inputs(tree, inputs)
    t_in = tree.input_type
    n = tree.comm.size
    q_inputs = {r: tuple(quantize(t_in, v) for v in inputs[r]) for r in range(n)}
    ledger = LinkLedger()
    root_value, partials = _reduce_up(tree, q_inputs, ledger, reduce_mode, arrival_seed)
    total = tuple(quantize(t_in, v) for v in root_value)
    bounds = segment_bounds(elems, n)
    outputs = {}
    for r, (lo, hi) in enumerate(bounds):
        shard = total[lo:hi]
        outputs[r] = shard
        path = tree.up_path(tree.comm.hosts[r])
        for child, par in zip(path, path[1:]):
            ledger.record_link((par, child), t_in.nbytes(hi - lo))
    exact = [math.fsum(float(q_inputs[r][j]) for r in range(n)) for j in range(elems)]
    err = error_stats(total, exact) if elems else ErrorStats(0.0, 0.0)
    time_s = inc_allreduce_time(tree, t_in.nbytes(elems), ab) if ab else 0.0
    metrics = _metrics(
        tree, scenario_id, "core_inc", ledger, 2 * tree.depth(), time_s,
        err, digest_values(t_in, outputs[0]),
    )
    return IncOutcome(outputs, metrics, partials)


def combined_rs_ag_run(
    topo: Topology,
    tree: ReductionTree,
    rs_inputs: dict,
    ag_inputs: Optional[dict] = None,
    ab: Optional[AlphaBeta] = None,
    scenario_id: str = "inc-combined",
) -> CombinedOutcome:
    """Overlap reduce_scatter (upward links) with allgather (downward links).

    Each phase streams its payload over one link direction, so the combined
    completion time is the slower phase rather than their sum. With
    ag_inputs omitted, the allgather redistributes the reduce_scatter
    shards (the two halves of an allreduce), which makes the phases
    equal-sized whenever the vector divides evenly.
    """
    tree.require_assigned()
    t_in = tree.input_type
    n = tree.comm.size
    rs = inc_reduce_scatter_run(topo, tree, rs_inputs, scenario_id=scenario_id)
    if ag_inputs is None:
        lengths = {len(v) for v in rs.outputs.values()}
        if len(lengths) != 1:
            raise ValueError("reduce_scatter shards are uneven; pass ag_inputs explicitly")
        ag_inputs = rs.outputs
    ag = inc_allgather_run(topo, tree, ag_inputs, scenario_id=scenario_id)
    ledger = LinkLedger()
    for src in (rs.metrics.link, ag.metrics.link):
        for link, b in src.bytes_by_link.items():
            ledger.bytes_by_link[link] = ledger.bytes_by_link.get(link, 0) + b
        for link, c in src.traversals_by_link.items():
            ledger.traversals_by_link[link] = ledger.traversals_by_link.get(link, 0) + c
    depth = tree.depth()
    ab = ab or AlphaBeta(0.0, 0.0)
    rs_bytes = t_in.nbytes(len(rs_inputs[0]))
    ag_bytes = t_in.nbytes(n * len(ag_inputs[0]))
    t_rs = ab.alpha * depth + rs_bytes * ab.beta
    t_ag = ab.alpha * depth + ag_bytes * ab.beta
    err = error_stats(
        [v for r in range(n) for v in rs.outputs[r]],
        [math.fsum(float(quantize(t_in, rs_inputs[r][j])) for r in range(n))
         for j in range(len(rs_inputs[0]))],
    ) if len(rs_inputs[0]) else ErrorStats(0.0, 0.0)
    metrics = _metrics(
        tree, scenario_id, "core_inc_combined_rs_ag", ledger, 2 * depth,
        max(t_rs, t_ag), err, digest_values(t_in, ag.outputs[0]),
        extras={
            "rs_time_s": t_rs,
            "ag_time_s": t_ag,
            "sequential_time_s": t_rs + t_ag,
        },
    )
    return CombinedOutcome(rs.outputs, ag.outputs, metrics)
