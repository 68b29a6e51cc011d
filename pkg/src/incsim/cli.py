"""Command-line front end: scenario files in, CSV or JSON tables out.

Subcommands: ``topo`` (topology summary), ``run`` (one collective),
``sweep`` (one run per swept value, or the training-fraction model table),
``preset`` (canned experiments), ``repro-check`` (digest stability).

Scenario files are flat JSON objects. Unknown keys are errors so that
experiment configs stay auditable; every validation message names the
offending field. Exit codes: 0 success, 1 configuration error,
2 schedule/oracle validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .collectives import CollectiveKind, CollectiveSpec, Communicator
from .engine import (
    Method,
    NiMode,
    OrderMode,
    RunConfig,
    ScheduleValidationError,
    repro_check,
    run,
    sparse_tree_profile,
)
from .inc_core import assign_precision, build_reduction_tree
from .metrics import csv_header, fmt_float
from .numerics import (
    AccumulatorPolicy,
    ElemType,
    PolicyKind,
    SparseVec,
    expected_density,
    fold_left,
)
from .perf import AlphaBeta, DpTrainingModel, sweep_fig4
from .topology import FatTreeParams, Topology, build_fat_tree

GIB = 2 ** 30

ALGORITHMS = ("ring", "binomial", "fibonacci", "pairwise")
FORMATS = ("csv", "json")
SWEEP_PARAMS = ("comm_fraction", "N", "elem_count")
PRESETS = ("fig4", "allreduce_bw", "link_count", "int4_traces", "sparse_density")


class ScenarioError(ValueError):
    """A scenario file failed parsing or validation."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment, fully specified; field names mirror the JSON keys."""

    kind: CollectiveKind
    n: int                                   # JSON key "N"
    hosts: Optional[Tuple[int, ...]] = None  # host indices per rank; 0..N-1 if absent
    elem_count: int = 16
    elem: ElemType = ElemType.FP32
    root: Optional[int] = None
    levels: int = 2
    hosts_per_leaf: int = 4
    down_ports: Union[int, Tuple[int, ...]] = 4
    up_ports: Union[int, Tuple[int, ...]] = 2
    method: Method = Method.ENDPOINT
    algo: str = "ring"
    ni_mode: NiMode = NiMode.PLAIN
    policy: PolicyKind = PolicyKind.SAME_AS_INPUT
    wide_type: ElemType = ElemType.FP64
    order: OrderMode = OrderMode.FIXED
    seed: int = 0
    block_k: int = 16
    alpha: float = 1e-6
    beta: float = 1e-9
    segment_bytes: int = 65536
    allreduce_bytes: int = 8 * GIB
    t_ring_s: float = 0.352
    t_inc_s: float = 0.151
    comm_fraction: float = 0.20
    scenario_id: str = "scenario"
    format: str = "csv"


def _need(value, types, path: str):
    # bool is an int subclass; reject it wherever a number is expected
    if isinstance(value, bool) or not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise ScenarioError(f"{path}: expected {names}, got {type(value).__name__}")
    return value


def _int_at_least(value, path: str, lo: int) -> int:
    v = _need(value, (int,), path)
    if v < lo:
        raise ScenarioError(f"{path}: must be >= {lo}")
    return v


def _float_in(value, path: str, lo: float, hi: float = float("inf")) -> float:
    v = float(_need(value, (int, float), path))
    if not lo <= v <= hi:
        hi_s = "" if hi == float("inf") else f" and <= {hi}"
        raise ScenarioError(f"{path}: must be >= {lo}{hi_s}")
    return v


def _enum(cls, value, path: str):
    _need(value, (str,), path)
    try:
        return cls(value)
    except ValueError:
        options = ", ".join(m.value for m in cls)
        raise ScenarioError(f"{path}: unknown value {value!r}; expected one of {options}")


def _choice(value, path: str, options: Sequence[str]) -> str:
    _need(value, (str,), path)
    if value not in options:
        raise ScenarioError(f"{path}: unknown value {value!r}; expected one of {', '.join(options)}")
    return value


def _ports(value, path: str):
    if isinstance(value, list):
        return tuple(_int_at_least(v, f"{path}[{i}]", 1) for i, v in enumerate(value))
    return _int_at_least(value, path, 1)


def _host_list(value, path: str) -> Tuple[int, ...]:
    _need(value, (list,), path)
    out = tuple(_int_at_least(v, f"{path}[{i}]", 0) for i, v in enumerate(value))
    if len(set(out)) != len(out):
        raise ScenarioError(f"{path}: host indices must be distinct")
    return out


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a flat JSON scenario; defaults fill absent keys."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")

    known = {
        "kind", "N", "hosts", "elem_count", "elem", "root", "levels",
        "hosts_per_leaf", "down_ports", "up_ports", "method", "algo",
        "ni_mode", "policy", "wide_type", "order", "seed", "block_k",
        "alpha", "beta", "segment_bytes", "allreduce_bytes", "t_ring_s",
        "t_inc_s", "comm_fraction", "scenario_id", "format",
    }
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(unknown)}")
    for key in ("kind", "N"):
        if key not in doc:
            raise ScenarioError(f"{key}: required")

    cfg = ScenarioConfig(
        kind=_enum(CollectiveKind, doc["kind"], "kind"),
        n=_int_at_least(doc["N"], "N", 1),
        hosts=_host_list(doc["hosts"], "hosts") if "hosts" in doc else None,
        elem_count=_int_at_least(doc.get("elem_count", 16), "elem_count", 0),
        elem=_enum(ElemType, doc.get("elem", "fp32"), "elem"),
        root=None if doc.get("root") is None else _int_at_least(doc["root"], "root", 0),
        levels=_int_at_least(doc.get("levels", 2), "levels", 1),
        hosts_per_leaf=_int_at_least(doc.get("hosts_per_leaf", 4), "hosts_per_leaf", 1),
        down_ports=_ports(doc.get("down_ports", 4), "down_ports"),
        up_ports=_ports(doc.get("up_ports", 2), "up_ports"),
        method=_enum(Method, doc.get("method", "endpoint"), "method"),
        algo=_choice(doc.get("algo", "ring"), "algo", ALGORITHMS),
        ni_mode=_enum(NiMode, doc.get("ni_mode", "plain"), "ni_mode"),
        policy=_enum(PolicyKind, doc.get("policy", "same_as_input"), "policy"),
        wide_type=_enum(ElemType, doc.get("wide_type", "fp64"), "wide_type"),
        order=_enum(OrderMode, doc.get("order", "fixed"), "order"),
        seed=_int_at_least(doc.get("seed", 0), "seed", 0),
        block_k=_int_at_least(doc.get("block_k", 16), "block_k", 1),
        alpha=_float_in(doc.get("alpha", 1e-6), "alpha", 0.0),
        beta=_float_in(doc.get("beta", 1e-9), "beta", 0.0),
        segment_bytes=_int_at_least(doc.get("segment_bytes", 65536), "segment_bytes", 1),
        allreduce_bytes=_int_at_least(doc.get("allreduce_bytes", 8 * GIB), "allreduce_bytes", 1),
        t_ring_s=_float_in(doc.get("t_ring_s", 0.352), "t_ring_s", 1e-12),
        t_inc_s=_float_in(doc.get("t_inc_s", 0.151), "t_inc_s", 1e-12),
        comm_fraction=_float_in(doc.get("comm_fraction", 0.20), "comm_fraction", 0.0, 1.0),
        scenario_id=str(_need(doc.get("scenario_id", "scenario"), (str,), "scenario_id")),
        format=_choice(doc.get("format", "csv"), "format", FORMATS),
    )

    if cfg.root is not None and cfg.kind is not CollectiveKind.BROADCAST:
        raise ScenarioError("root: only applies to broadcast")
    if cfg.root is not None and cfg.root >= cfg.n:
        raise ScenarioError(f"root: must be < N ({cfg.n})")
    if cfg.hosts is not None and len(cfg.hosts) != cfg.n:
        raise ScenarioError(f"hosts: expected {cfg.n} entries, got {len(cfg.hosts)}")
    if not cfg.scenario_id:
        raise ScenarioError("scenario_id: must be non-empty")
    return cfg


def serialize(cfg: ScenarioConfig) -> str:
    """Inverse of parse_scenario: parse(serialize(cfg)) == cfg."""
    doc = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        key = "N" if f.name == "n" else f.name
        if value is None:
            continue
        if isinstance(value, Enum):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        doc[key] = value
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------- construction


def build_topology(cfg: ScenarioConfig) -> Topology:
    params = FatTreeParams(
        levels=cfg.levels,
        hosts_per_leaf=cfg.hosts_per_leaf,
        down_ports=cfg.down_ports,
        up_ports=cfg.up_ports,
    )
    return build_fat_tree(params)


def build_spec(cfg: ScenarioConfig, topo: Topology) -> CollectiveSpec:
    idxs = cfg.hosts if cfg.hosts is not None else tuple(range(cfg.n))
    total = len(topo.hosts)
    for i in idxs:
        if i >= total:
            raise ScenarioError(f"hosts: index {i} exceeds topology ({total} hosts)")
    return CollectiveSpec(
        kind=cfg.kind,
        comm=Communicator(tuple(f"h{i}" for i in idxs)),
        elem_count=cfg.elem_count,
        elem_type=cfg.elem,
        root=cfg.root,
    )


def build_run_config(cfg: ScenarioConfig) -> RunConfig:
    return RunConfig(
        method=cfg.method,
        algo=cfg.algo,
        ni_mode=cfg.ni_mode,
        elem=cfg.elem,
        policy=AccumulatorPolicy(cfg.policy, cfg.wide_type),
        order=cfg.order,
        seed=cfg.seed,
        ab=AlphaBeta(alpha=cfg.alpha, beta=cfg.beta, segment_bytes=cfg.segment_bytes),
        scenario_id=cfg.scenario_id,
    )


def default_inputs(cfg: ScenarioConfig) -> Dict[int, list]:
    """Deterministic per-rank vectors; integral values are exact in every type."""
    span = 8 if cfg.elem is ElemType.INT4 else 100
    return {
        r: [((r * 31 + j * 7) % (2 * span)) - span for j in range(cfg.elem_count)]
        for r in range(cfg.n)
    }


# ------------------------------------------------------------------ output


def _table_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _metrics_text(rows, fmt: str) -> str:
    if fmt == "json":
        docs = [m.to_json_dict() for m in rows]
        return json.dumps(docs[0] if len(docs) == 1 else docs, indent=2, sort_keys=True) + "\n"
    return _table_csv(csv_header(), [m.csv_row() for m in rows])


# -------------------------------------------------------------- subcommands


def cmd_topo(cfg: Optional[ScenarioConfig], out: Optional[str], fmt: str) -> int:
    topo = build_topology(cfg) if cfg is not None else build_fat_tree(
        FatTreeParams(levels=2, hosts_per_leaf=4, down_ports=4, up_ports=2)
    )
    summary = topo.summary()
    if fmt == "json":
        text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    else:
        rows = [(k, json.dumps(v) if isinstance(v, (list, tuple)) else str(v))
                for k, v in sorted(summary.items())]
        text = _table_csv(("field", "value"), rows)
    _emit(text, out)
    return 0


def cmd_run(cfg: ScenarioConfig, out: Optional[str], fmt: str) -> int:
    topo = build_topology(cfg)
    spec = build_spec(cfg, topo)
    result = run(topo, spec, build_run_config(cfg), default_inputs(cfg))
    _emit(_metrics_text([result.metrics], fmt), out)
    return 0


def _sweep_values(lo: float, hi: float, steps: int, integral: bool) -> List:
    if steps < 1:
        raise ScenarioError("steps: must be >= 1")
    if steps == 1:
        raw = [lo]
    else:
        raw = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    if integral:
        return [int(round(v)) for v in raw]
    return raw


def cmd_sweep(
    cfg: ScenarioConfig,
    param: str,
    lo: float,
    hi: float,
    steps: int,
    out: Optional[str],
    fmt: str,
    jobs: int = 1,
) -> int:
    if param not in SWEEP_PARAMS:
        raise ScenarioError(
            f"param: unknown value {param!r}; expected one of {', '.join(SWEEP_PARAMS)}"
        )
    if param == "comm_fraction":
        model = DpTrainingModel(
            allreduce_bytes=cfg.allreduce_bytes,
            t_ring_s=cfg.t_ring_s,
            t_inc_s=cfg.t_inc_s,
            comm_fraction=cfg.comm_fraction,
        )
        rows = sweep_fig4(model, f_from=lo, f_to=hi, steps=steps)
        if fmt == "json":
            docs = [
                {
                    "f": r.f,
                    "new_iter_fraction": r.new_iter_fraction,
                    "time_reduction_pct": 100 * r.time_reduction,
                    "speedup_pct": 100 * r.speedup,
                }
                for r in rows
            ]
            text = json.dumps(docs, indent=2, sort_keys=True) + "\n"
        else:
            text = _table_csv(
                ("f", "new_iter_fraction", "time_reduction_pct", "speedup_pct"),
                [
                    (
                        fmt_float(r.f),
                        fmt_float(r.new_iter_fraction),
                        fmt_float(100 * r.time_reduction),
                        fmt_float(100 * r.speedup),
                    )
                    for r in rows
                ],
            )
        _emit(text, out)
        return 0

    values = _sweep_values(lo, hi, steps, integral=True)
    configs = []
    for v in values:
        sid = f"{cfg.scenario_id}-{param}={v}"
        if param == "N":
            configs.append(dataclasses.replace(cfg, n=v, hosts=None, scenario_id=sid))
        else:
            configs.append(dataclasses.replace(cfg, elem_count=v, scenario_id=sid))

    def one(c: ScenarioConfig):
        topo = build_topology(c)
        return run(topo, build_spec(c, topo), build_run_config(c), default_inputs(c)).metrics

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            metrics = [f.result() for f in [pool.submit(one, c) for c in configs]]
    else:
        metrics = [one(c) for c in configs]
    _emit(_metrics_text(metrics, fmt), out)
    return 0


# ---------------------------------------------------------------- presets


def _preset_fig4(seed: int):
    rows = sweep_fig4(DpTrainingModel())
    header = ("f", "new_iter_fraction", "time_reduction_pct", "speedup_pct")
    table = [
        (fmt_float(r.f), fmt_float(r.new_iter_fraction),
         fmt_float(100 * r.time_reduction), fmt_float(100 * r.speedup))
        for r in rows
    ]
    docs = [
        {"f": r.f, "new_iter_fraction": r.new_iter_fraction,
         "time_reduction_pct": 100 * r.time_reduction, "speedup_pct": 100 * r.speedup}
        for r in rows
    ]
    return header, table, docs


def _preset_allreduce_bw(seed: int):
    topo = build_fat_tree(FatTreeParams(2, hosts_per_leaf=16, down_ports=4, up_ports=2))
    header = ("N", "ring_edge_bytes_per_host", "inc_edge_bytes_per_host", "ratio")
    table, docs = [], []
    for n in (4, 8, 16, 32, 64):
        spec = CollectiveSpec(
            kind=CollectiveKind.ALLREDUCE,
            comm=Communicator(tuple(f"h{i}" for i in range(n))),
            elem_count=64,
            elem_type=ElemType.FP32,
        )
        ring = run(topo, spec, RunConfig(method=Method.ENDPOINT, seed=seed), _preset_inputs(n, 64))
        inc = run(topo, spec, RunConfig(method=Method.CORE_INC, seed=seed), _preset_inputs(n, 64))
        r, c = ring.metrics.edge_bytes_per_host, inc.metrics.edge_bytes_per_host
        table.append((str(n), str(r), str(c), fmt_float(r / c)))
        docs.append({"N": n, "ring_edge_bytes_per_host": r,
                     "inc_edge_bytes_per_host": c, "ratio": r / c})
    return header, table, docs


def _preset_inputs(n: int, elems: int) -> Dict[int, list]:
    return {r: [((r * 13 + j * 5) % 64) - 32 for j in range(elems)] for r in range(n)}


def _preset_link_count(seed: int):
    topo = build_fat_tree(FatTreeParams(2, hosts_per_leaf=4, down_ports=4, up_ports=2))
    comm = Communicator(tuple(f"h{i}" for i in range(8)))  # spans two leaves
    header = ("kind", "ring_traversals", "inc_traversals")
    table, docs = [], []
    for kind in (CollectiveKind.ALLREDUCE, CollectiveKind.ALLGATHER):
        spec = CollectiveSpec(kind=kind, comm=comm, elem_count=8, elem_type=ElemType.INT32)
        ring = run(topo, spec, RunConfig(method=Method.ENDPOINT, seed=seed), _preset_inputs(8, 8))
        inc = run(topo, spec, RunConfig(method=Method.CORE_INC, seed=seed), _preset_inputs(8, 8))
        rt = ring.metrics.total_link_traversals
        it = inc.metrics.total_link_traversals
        table.append((kind.value, str(rt), str(it)))
        docs.append({"kind": kind.value, "ring_traversals": rt, "inc_traversals": it})
    return header, table, docs


def _preset_int4_traces(seed: int):
    folds = (
        ("additive", fold_left(ElemType.INT4, 7, (("-", 5), ("+", 5), ("+", 5), ("-", 3), ("-", 7)))),
        ("multiplicative", fold_left(ElemType.INT4, 2, (("*", 2), ("*", 3), ("/", 2)))),
    )
    header = ("trace", "step", "value")
    table = [
        (name, str(i), str(v))
        for name, result in folds
        for i, v in enumerate(result.trace)
    ]
    docs = [
        {"trace": name, "values": list(result.trace), "final": result.final}
        for name, result in folds
    ]
    return header, table, docs


def _preset_sparse_density(seed: int):
    import random

    n, m, p = 100_000, 64, 0.01
    rng = random.Random(seed)
    topo = build_fat_tree(FatTreeParams(2, hosts_per_leaf=16, down_ports=4, up_ports=2))
    comm = Communicator(tuple(f"h{i}" for i in range(m)))
    tree = assign_precision(
        build_reduction_tree(topo, comm),
        ElemType.FP32,
        AccumulatorPolicy(PolicyKind.SAME_AS_INPUT),
    )
    nnz = int(p * n)
    inputs = {
        r: SparseVec(n, tuple(sorted(rng.sample(range(n), nnz))), (1.0,) * nnz)
        for r in range(m)
    }
    prof = sparse_tree_profile(tree, inputs)
    header = ("level", "max_nnz", "density", "switchover")
    table = [
        (str(s.level), str(s.max_nnz), fmt_float(s.density), str(s.switchover).lower())
        for s in prof.levels
    ]
    docs = {
        "n": prof.n,
        "levels": [dataclasses.asdict(s) for s in prof.levels],
        "switchover_level": prof.switchover_level,
        "root_nnz": prof.root_nnz,
        "root_density": prof.root_density,
        "expected_density": expected_density(p, m),
        "core_volume_bytes": prof.core_volume_bytes,
        "sharded_volume_bytes": prof.sharded_volume_bytes,
    }
    return header, table, docs


_PRESET_FNS: Dict[str, Callable] = {
    "fig4": _preset_fig4,
    "allreduce_bw": _preset_allreduce_bw,
    "link_count": _preset_link_count,
    "int4_traces": _preset_int4_traces,
    "sparse_density": _preset_sparse_density,
}


def cmd_preset(name: str, out: Optional[str], fmt: str, seed: int = 0) -> int:
    if name not in _PRESET_FNS:
        raise ScenarioError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    header, table, docs = _PRESET_FNS[name](seed)
    if fmt == "json":
        text = json.dumps(docs, indent=2, sort_keys=True) + "\n"
    else:
        text = _table_csv(header, table)
    _emit(text, out)
    return 0


def cmd_repro_check(cfg: ScenarioConfig, trials: int, out: Optional[str], fmt: str) -> int:
    topo = build_topology(cfg)
    spec = build_spec(cfg, topo)
    report = repro_check(
        topo, spec, build_run_config(cfg), default_inputs(cfg), trials=trials, seed=cfg.seed
    )
    doc = {
        "trials": report.trials,
        "distinct_digests": list(report.distinct_digests),
        "intra_ok": report.intra_ok,
        "inter_same_shape": report.inter_same_shape,
        "inter_diff_shape": report.inter_diff_shape,
        "notes": list(report.notes),
    }
    if fmt == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        rows = [
            (k, v if isinstance(v, str) else json.dumps(v)) for k, v in doc.items()
        ]
        text = _table_csv(("field", "value"), rows)
    _emit(text, out)
    return 0


# ------------------------------------------------------------------- main


def _read_config(path: Optional[str], seed_flag: Optional[int]) -> Optional[ScenarioConfig]:
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        cfg = parse_scenario(fh.read())
    if seed_flag is not None:
        cfg = dataclasses.replace(cfg, seed=seed_flag)
    return cfg


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="incsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("-c", "--config", required=config_required, help="scenario JSON path")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--format", default=None, choices=FORMATS)
        p.add_argument("--seed", type=int, default=None)

    common(sub.add_parser("topo", help="print the topology summary"), config_required=False)
    common(sub.add_parser("run", help="execute one collective"))

    sweep = sub.add_parser("sweep", help="run once per swept value")
    common(sweep)
    sweep.add_argument("--param", required=True, help="|".join(SWEEP_PARAMS))
    sweep.add_argument("--from", dest="lo", type=float, required=True)
    sweep.add_argument("--to", dest="hi", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--jobs", type=int, default=1)

    preset = sub.add_parser("preset", help="run a canned experiment")
    preset.add_argument("name", help="|".join(PRESETS))
    preset.add_argument("--out", default=None)
    preset.add_argument("--format", default=None, choices=FORMATS)
    preset.add_argument("--seed", type=int, default=None)

    repro = sub.add_parser("repro-check", help="digest stability report")
    common(repro)
    repro.add_argument("--trials", type=int, default=10)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "preset":
            return cmd_preset(
                args.name, args.out, args.format or "csv",
                seed=args.seed if args.seed is not None else 0,
            )
        cfg = _read_config(args.config, args.seed)
        fmt = args.format or (cfg.format if cfg is not None else "csv")
        if args.command == "topo":
            return cmd_topo(cfg, args.out, fmt)
        if args.command == "run":
            return cmd_run(cfg, args.out, fmt)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.param, args.lo, args.hi, args.steps,
                             args.out, fmt, jobs=args.jobs)
        if args.command == "repro-check":
            return cmd_repro_check(cfg, args.trials, args.out, fmt)
        raise AssertionError(f"unhandled command {args.command}")
    except ScheduleValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
