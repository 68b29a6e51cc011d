"""Endpoint collective schedules over an abstract rank space.

A Schedule is a sequence of rounds; each round is a set of Transfers under
a one-port full-duplex model (every rank sends at most once and receives at
most once per round). Causality requires a rank to hold a segment at the
start of the round in which it sends it. Executing a schedule on concrete
inputs must reproduce `reference_result` exactly when arithmetic is exact.

Round counts:
  ring allreduce          2(N-1)   (reduce-scatter phase then allgather)
  ring allgather          N-1
  ring reduce_scatter     N-1
  pipelined ring bcast    (N-1) + (segments-1)
  binomial bcast          ceil(log2 N)
  fibonacci bcast         min t with informed(t) >= N, where
                          informed(t) = informed(t-1) + informed(t-2),
                          informed(0) = 1, informed(1) = 2
                          (postal model: messages arrive one round after
                          injection, senders inject every round; transfers
                          are recorded in their arrival round)

Vectors are segmented with ceil(len/N) elements per segment and a shorter
final segment, no padding. Per-rank ring allreduce traffic is
2(N-1)/N * S bytes each way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .numerics import ElemType, scalar_add

__all__ = [
    "CollectiveKind",
    "Communicator",
    "CollectiveSpec",
    "Action",
    "Transfer",
    "Schedule",
    "ValidationReport",
    "ring_allreduce_schedule",
    "ring_allgather_schedule",
    "ring_reduce_scatter_schedule",
    "alltoall_schedule",
    "pipelined_ring_broadcast_schedule",
    "binomial_broadcast_schedule",
    "fibonacci_broadcast_schedule",
    "fibonacci_rounds",
    "segment_bounds",
    "initial_segments",
    "initial_state",
    "execute_schedule",
    "result_view",
    "reference_result",
    "validate_schedule",
]


class CollectiveKind(Enum):
    ALLREDUCE = "allreduce"
    ALLGATHER = "allgather"
    REDUCE_SCATTER = "reduce_scatter"
    BROADCAST = "broadcast"
    ALLTOALL = "alltoall"


@dataclass(frozen=True)
class Communicator:
    """Ordered set of participating hosts; rank i is hosts[i]."""

    hosts: tuple

    def __post_init__(self):
        if not self.hosts:
            raise ValueError("communicator must have at least one rank")
        if len(set(self.hosts)) != len(self.hosts):
            raise ValueError("communicator hosts must be distinct")
        object.__setattr__(self, "hosts", tuple(self.hosts))

    @property
    def size(self) -> int:
        return len(self.hosts)


@dataclass(frozen=True)
class CollectiveSpec:
    """One collective operation: what, over whom, how much, in which type.

    elem_count is the per-rank vector length; for allgather and alltoall it
    is the per-rank contribution length. root is required for broadcast and
    forbidden otherwise.
    """

    kind: CollectiveKind
    comm: Communicator
    elem_count: int
    elem_type: ElemType = ElemType.FP32
    root: Optional[int] = None

    def __post_init__(self):
        if self.elem_count < 0:
            raise ValueError("elem_count must be >= 0")
        if self.kind is CollectiveKind.BROADCAST:
            root = 0 if self.root is None else self.root
            if not 0 <= root < self.comm.size:
                raise ValueError("root out of range")
            object.__setattr__(self, "root", root)
        elif self.root is not None:
            raise ValueError(f"root is only meaningful for broadcast, not {self.kind.value}")

    @property
    def nranks(self) -> int:
        return self.comm.size

    def nbytes(self, elems: int) -> int:
        return self.elem_type.nbytes(elems)


class Action(Enum):
    COPY = "copy"
    REDUCE = "reduce"


@dataclass(frozen=True)
class Transfer:
    src: int
    dst: int
    segment: int
    elems: int
    nbytes: int
    action: Action


@dataclass(frozen=True)
class Schedule:
    """Rounds of transfers plus the segment layout they operate on.

    `algo` names the generator and fixes the initial holdings layout;
    `seg_elems[s]` is the element count of segment s.
    """

    kind: CollectiveKind
    algo: str
    rounds: tuple
    seg_elems: tuple

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def num_segments(self) -> int:
        return len(self.seg_elems)

    def to_json(self) -> str:
        doc = {
            "kind": self.kind.value,
            "algo": self.algo,
            "segments": list(self.seg_elems),
            "rounds": [
                [
                    {
                        "src": t.src,
                        "dst": t.dst,
                        "segment": t.segment,
                        "elems": t.elems,
                        "bytes": t.nbytes,
                        "action": t.action.value,
                    }
                    for t in rnd
                ]
                for rnd in self.rounds
            ],
        }
        return json.dumps(doc, indent=2)


def segment_bounds(total: int, nseg: int) -> tuple:
    """Split `total` elements into nseg contiguous segments, last shorter."""
    if nseg < 1:
        raise ValueError("need at least one segment")
    per = math.ceil(total / nseg) if total else 0
    out = []
    for s in range(nseg):
        lo = min(s * per, total)
        hi = min(lo + per, total)
        out.append((lo, hi))
    return tuple(out)


def _seg_lengths(total: int, nseg: int) -> tuple:
    return tuple(hi - lo for lo, hi in segment_bounds(total, nseg))


def _transfer(spec: CollectiveSpec, src: int, dst: int, seg: int, elems: int, action: Action) -> Transfer:
    return Transfer(src, dst, seg, elems, spec.nbytes(elems), action)


def ring_allreduce_schedule(spec: CollectiveSpec) -> Schedule:
    """Reduce-scatter around the ring, then allgather: 2(N-1) rounds.

    After round N-1, rank i holds the complete segment (i+1) mod N; the
    allgather phase rotates completed segments another N-1 steps.
    """
    if spec.kind is not CollectiveKind.ALLREDUCE:
        raise ValueError("spec kind must be allreduce")
    n = spec.nranks
    lens = _seg_lengths(spec.elem_count, n)
    rounds: List[tuple] = []
    for t in range(n - 1):
        rounds.append(
            tuple(
                _transfer(spec, i, (i + 1) % n, (i - t) % n, lens[(i - t) % n], Action.REDUCE)
                for i in range(n)
            )
        )
    for t in range(n - 1):
        rounds.append(
            tuple(
                _transfer(spec, i, (i + 1) % n, (i + 1 - t) % n, lens[(i + 1 - t) % n], Action.COPY)
                for i in range(n)
            )
        )
    return Schedule(spec.kind, "ring_allreduce", tuple(rounds), lens)


def ring_reduce_scatter_schedule(spec: CollectiveSpec) -> Schedule:
    """N-1 reduce rounds leaving rank i with its own completed segment i."""
    if spec.kind is not CollectiveKind.REDUCE_SCATTER:
        raise ValueError("spec kind must be reduce_scatter")
    n = spec.nranks
    lens = _seg_lengths(spec.elem_count, n)
    rounds = tuple(
        tuple(
            _transfer(spec, i, (i + 1) % n, (i - t - 1) % n, lens[(i - t - 1) % n], Action.REDUCE)
            for i in range(n)
        )
        for t in range(n - 1)
    )
    return Schedule(spec.kind, "ring_reduce_scatter", rounds, lens)


def ring_allgather_schedule(spec: CollectiveSpec) -> Schedule:
    """N-1 copy rounds; rank i starts holding only its own contribution."""
    if spec.kind is not CollectiveKind.ALLGATHER:
        raise ValueError("spec kind must be allgather")
    n = spec.nranks
    lens = tuple(spec.elem_count for _ in range(n))
    rounds = tuple(
        tuple(
            _transfer(spec, i, (i + 1) % n, (i - t) % n, lens[(i - t) % n], Action.COPY)
            for i in range(n)
        )
        for t in range(n - 1)
    )
    return Schedule(spec.kind, "ring_allgather", rounds, lens)


def alltoall_schedule(spec: CollectiveSpec) -> Schedule:
    """Pairwise exchange: in round r every rank sends its block to rank i+r.

    Block (i, j), segment id i*N + j, is rank i's contribution slice for
    rank j; each round's send pattern is a permutation so the one-port
    constraint holds.
    """
    if spec.kind is not CollectiveKind.ALLTOALL:
        raise ValueError("spec kind must be alltoall")
    n = spec.nranks
    block = _seg_lengths(spec.elem_count, n)
    seg_elems = tuple(block[j] for i in range(n) for j in range(n))
    rounds = tuple(
        tuple(
            _transfer(spec, i, (i + r) % n, i * n + (i + r) % n, block[(i + r) % n], Action.COPY)
            for i in range(n)
        )
        for r in range(1, n)
    )
    return Schedule(spec.kind, "alltoall_pairwise", rounds, seg_elems)


def pipelined_ring_broadcast_schedule(spec: CollectiveSpec, segment_bytes: int) -> Schedule:
    """Chain from the root; segment s leaves hop j in round j+s.

    Rounds total (N-1) + (segments-1); each hop forwards a segment one
    round after receiving it.
    """
    if spec.kind is not CollectiveKind.BROADCAST:
        raise ValueError("spec kind must be broadcast")
    total_bytes = spec.nbytes(spec.elem_count)
    if segment_bytes <= 0 and total_bytes > 0:
        raise ValueError("segment_bytes must be positive for nonzero data")
    k = max(1, math.ceil(total_bytes / segment_bytes)) if total_bytes else 1
    lens = _seg_lengths(spec.elem_count, k)
    n = spec.nranks
    order = [(spec.root + j) % n for j in range(n)]
    rounds = []
    for t in range((n - 1) + (k - 1)) if n > 1 else []:
        rnd = []
        for j in range(n - 1):
            s = t - j
            if 0 <= s < k:
                rnd.append(_transfer(spec, order[j], order[j + 1], s, lens[s], Action.COPY))
        rounds.append(tuple(rnd))
    return Schedule(spec.kind, "pipelined_ring_broadcast", tuple(rounds), lens)


def binomial_broadcast_schedule(spec: CollectiveSpec) -> Schedule:
    """Doubling tree: ceil(log2 N) rounds, whole vector per transfer."""
    if spec.kind is not CollectiveKind.BROADCAST:
        raise ValueError("spec kind must be broadcast")
    n = spec.nranks
    order = [(spec.root + j) % n for j in range(n)]
    lens = (spec.elem_count,)
    rounds = []
    informed = 1
    while informed < n:
        rnd = []
        for i in range(informed):
            j = i + informed
            if j < n:
                rnd.append(_transfer(spec, order[i], order[j], 0, spec.elem_count, Action.COPY))
        rounds.append(tuple(rnd))
        informed *= 2
    return Schedule(spec.kind, "binomial_broadcast", tuple(rounds), lens)


def fibonacci_rounds(n: int) -> int:
    """Postal-model round count: min t with informed(t) >= n."""
    if n < 1:
        raise ValueError("need at least one rank")
    if n == 1:
        return 0
    informed = [1, 2]
    t = 1
    while informed[-1] < n:
        informed.append(informed[-1] + informed[-2])
        t += 1
    return t


def fibonacci_broadcast_schedule(spec: CollectiveSpec) -> Schedule:
    """Latency-2 postal broadcast; arrivals at round t number informed(t-2).

    Messages injected in round t-1 arrive at the end of round t, so a round
    t arrival was sent by a rank informed by the end of round t-2. Each
    transfer is recorded in its arrival round; senders are taken from the
    informed list in order, receivers are the next uninformed ranks.
    """
    if spec.kind is not CollectiveKind.BROADCAST:
        raise ValueError("spec kind must be broadcast")
    n = spec.nranks
    order = [(spec.root + j) % n for j in range(n)]
    lens = (spec.elem_count,)
    total = fibonacci_rounds(n)
    informed_counts = [1, 2]
    while informed_counts[-1] < n:
        informed_counts.append(informed_counts[-1] + informed_counts[-2])
    informed = [order[0]]
    next_new = 1
    rounds = []
    for t in range(1, total + 1):
        senders = informed[: (informed_counts[t - 2] if t >= 2 else 1)]
        rnd = []
        fresh = []
        for s in senders:
            if next_new >= n:
                break
            dst = order[next_new]
            rnd.append(_transfer(spec, s, dst, 0, spec.elem_count, Action.COPY))
            fresh.append(dst)
            next_new += 1
        rounds.append(tuple(rnd))
        informed.extend(fresh)
    return Schedule(spec.kind, "fibonacci_broadcast", tuple(rounds), lens)


# ------------------------------------------------------------- execution


def initial_segments(spec: CollectiveSpec, schedule: Schedule) -> dict:
    """Which segment ids each rank holds before round 0, by algorithm."""
    n = spec.nranks
    all_segs = set(range(schedule.num_segments))
    if schedule.algo in ("ring_allreduce", "ring_reduce_scatter"):
        return {r: set(all_segs) for r in range(n)}
    if schedule.algo == "ring_allgather":
        return {r: {r} for r in range(n)}
    if schedule.algo == "alltoall_pairwise":
        return {r: {r * n + j for j in range(n)} for r in range(n)}
    if spec.kind is CollectiveKind.BROADCAST:
        return {r: (set(all_segs) if r == spec.root else set()) for r in range(n)}
    raise ValueError(f"unknown schedule layout {schedule.algo!r}")


def initial_state(spec: CollectiveSpec, schedule: Schedule, rank_vectors: dict) -> dict:
    """Build per-rank segment stores from flat per-rank input vectors."""
    n = spec.nranks
    state: Dict[int, dict] = {r: {} for r in range(n)}
    if schedule.algo in ("ring_allreduce", "ring_reduce_scatter"):
        bounds = segment_bounds(spec.elem_count, n)
        for r in range(n):
            vec = rank_vectors[r]
            for s, (lo, hi) in enumerate(bounds):
                state[r][s] = list(vec[lo:hi])
    elif schedule.algo == "ring_allgather":
        for r in range(n):
            state[r][r] = list(rank_vectors[r])
    elif schedule.algo == "alltoall_pairwise":
        bounds = segment_bounds(spec.elem_count, n)
        for r in range(n):
            vec = rank_vectors[r]
            for j, (lo, hi) in enumerate(bounds):
                state[r][r * n + j] = list(vec[lo:hi])
    elif spec.kind is CollectiveKind.BROADCAST:
        bounds = segment_bounds(spec.elem_count, schedule.num_segments)
        vec = rank_vectors[spec.root]
        for s, (lo, hi) in enumerate(bounds):
            state[spec.root][s] = list(vec[lo:hi])
    else:
        raise ValueError(f"unknown schedule layout {schedule.algo!r}")
    return state


def execute_schedule(
    spec: CollectiveSpec,
    schedule: Schedule,
    rank_vectors: dict,
    elem: Optional[ElemType] = None,
    observer: Optional[Callable] = None,
) -> dict:
    """Run the schedule round by round and return the final segment state.

    With elem=None arithmetic is exact (Python ints / fp64); otherwise every
    reduce is performed in `elem`. Sends read the value held at round start.
    `observer(round_idx, transfer)` fires once per applied transfer.
    """
    state = initial_state(spec, schedule, rank_vectors)
    for ridx, rnd in enumerate(schedule.rounds):
        staged = []
        for tr in rnd:
            if tr.segment not in state[tr.src]:
                raise ValueError(f"round {ridx}: rank {tr.src} does not hold segment {tr.segment}")
            staged.append((tr, list(state[tr.src][tr.segment])))
        for tr, payload in staged:
            if observer is not None:
                observer(ridx, tr)
            if tr.action is Action.COPY:
                state[tr.dst][tr.segment] = payload
            else:
                cur = state[tr.dst].get(tr.segment)
                if cur is None:
                    raise ValueError(f"round {ridx}: rank {tr.dst} cannot reduce into missing segment")
                if elem is None:
                    state[tr.dst][tr.segment] = [a + b for a, b in zip(cur, payload)]
                else:
                    state[tr.dst][tr.segment] = [scalar_add(elem, a, b) for a, b in zip(cur, payload)]
    return state


def result_view(spec: CollectiveSpec, schedule: Schedule, state: dict) -> dict:
    """Extract each rank's final flat result vector from segment state."""
    n = spec.nranks
    out = {}
    if spec.kind in (CollectiveKind.ALLREDUCE, CollectiveKind.ALLGATHER, CollectiveKind.BROADCAST):
        for r in range(n):
            flat: list = []
            for s in range(schedule.num_segments):
                flat.extend(state[r].get(s, []))
            out[r] = tuple(flat)
    elif spec.kind is CollectiveKind.REDUCE_SCATTER:
        for r in range(n):
            out[r] = tuple(state[r].get(r, []))
    else:  # alltoall: rank r collects column r in source order
        for r in range(n):
            flat = []
            for j in range(n):
                flat.extend(state[r].get(j * n + r, []))
            out[r] = tuple(flat)
    return out


def reference_result(spec: CollectiveSpec, rank_vectors: dict) -> dict:
    """Exact expected outputs per rank (Python int / fp64 arithmetic).

    Reductions sum contributions in rank order. Raises if any rank's input
    is missing or the wrong length.
    """
    n = spec.nranks
    for r in range(n):
        if r not in rank_vectors:
            raise ValueError(f"missing input for rank {r}")
        if len(rank_vectors[r]) != spec.elem_count:
            raise ValueError(f"rank {r} input has length {len(rank_vectors[r])}, expected {spec.elem_count}")
    kind = spec.kind
    if kind in (CollectiveKind.ALLREDUCE, CollectiveKind.REDUCE_SCATTER):
        total = list(rank_vectors[0])
        for r in range(1, n):
            total = [a + b for a, b in zip(total, rank_vectors[r])]
        if kind is CollectiveKind.ALLREDUCE:
            return {r: tuple(total) for r in range(n)}
        bounds = segment_bounds(spec.elem_count, n)
        return {r: tuple(total[lo:hi]) for r, (lo, hi) in enumerate(bounds)}
    if kind is CollectiveKind.ALLGATHER:
        flat = tuple(v for r in range(n) for v in rank_vectors[r])
        return {r: flat for r in range(n)}
    if kind is CollectiveKind.BROADCAST:
        vec = tuple(rank_vectors[spec.root])
        return {r: vec for r in range(n)}
    bounds = segment_bounds(spec.elem_count, n)
    return {
        r: tuple(v for j in range(n) for v in rank_vectors[j][bounds[r][0]: bounds[r][1]])
        for r in range(n)
    }


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    one_port_ok: bool
    causality_ok: bool
    result_ok: bool
    problems: tuple

    def first_problem(self) -> Optional[str]:
        return self.problems[0] if self.problems else None


def validate_schedule(spec: CollectiveSpec, schedule: Schedule, rank_vectors: dict) -> ValidationReport:
    """Check one-port, causality, and exact-arithmetic result equivalence.

    The first violated round and rank are named in the report. Causality:
    a rank may only send a segment it holds at round start, and a reduce
    needs the destination to already hold its own partial.
    """
    problems: List[str] = []
    one_port_ok = causality_ok = True
    holdings = initial_segments(spec, schedule)
    n = spec.nranks
    for ridx, rnd in enumerate(schedule.rounds):
        srcs: set = set()
        dsts: set = set()
        for tr in rnd:
            if not (0 <= tr.src < n and 0 <= tr.dst < n) or tr.src == tr.dst:
                causality_ok = False
                problems.append(f"round {ridx}: bad endpoints {tr.src}->{tr.dst}")
                continue
            if tr.src in srcs and one_port_ok:
                one_port_ok = False
                problems.append(f"round {ridx}: rank {tr.src} sends twice (one-port violation)")
            if tr.dst in dsts and one_port_ok:
                one_port_ok = False
                problems.append(f"round {ridx}: rank {tr.dst} receives twice (one-port violation)")
            srcs.add(tr.src)
            dsts.add(tr.dst)
            if tr.segment not in holdings[tr.src] and causality_ok:
                causality_ok = False
                problems.append(
                    f"round {ridx}: rank {tr.src} sends segment {tr.segment} before holding it"
                )
            if tr.action is Action.REDUCE and tr.segment not in holdings[tr.dst] and causality_ok:
                causality_ok = False
                problems.append(
                    f"round {ridx}: rank {tr.dst} reduces into segment {tr.segment} it does not hold"
                )
        for tr in rnd:
            if 0 <= tr.dst < n:
                holdings[tr.dst].add(tr.segment)
    result_ok = False
    if causality_ok:
        try:
            final = result_view(spec, schedule, execute_schedule(spec, schedule, rank_vectors))
            expect = reference_result(spec, rank_vectors)
            result_ok = final == expect
            if not result_ok:
                bad = sorted(r for r in expect if final.get(r) != expect[r])
                problems.append(f"result mismatch at ranks {bad}")
        except ValueError as exc:
            problems.append(f"execution failed: {exc}")
    else:
        problems.append("result check skipped due to causality violation")
    ok = one_port_ok and causality_ok and result_ok
    return ValidationReport(ok, one_port_ok, causality_ok, result_ok, tuple(problems))
