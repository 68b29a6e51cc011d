#!/usr/bin/env python3
"""Ring vs switch-tree allreduce across participant counts.

Prints one row per N with link bytes, per-host edge bytes, host-memory
bytes, traversals, and modeled time for each method, plus the ratios of
the ring row to the others.

Usage: python3 scripts/compare_ring_vs_inc.py [--elem-count 64] [--ns 4,8,16,32,64]
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from incsim.collectives import CollectiveKind, CollectiveSpec, Communicator  # noqa: E402
from incsim.engine import Method, NiMode, RunConfig, compare_methods  # noqa: E402
from incsim.numerics import ElemType  # noqa: E402
from incsim.topology import FatTreeParams, build_fat_tree  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--elem-count", type=int, default=64)
    parser.add_argument("--ns", default="4,8,16,32,64")
    args = parser.parse_args()
    ns = [int(v) for v in args.ns.split(",")]

    topo = build_fat_tree(FatTreeParams(2, hosts_per_leaf=16, down_ports=4, up_ports=2))
    configs = [
        RunConfig(method=Method.ENDPOINT, ni_mode=NiMode.PLAIN, scenario_id="ring-plain"),
        RunConfig(method=Method.ENDPOINT, ni_mode=NiMode.EDGE_INC, scenario_id="ring-edge"),
        RunConfig(method=Method.CORE_INC, scenario_id="core-inc"),
        RunConfig(method=Method.COMBINED, scenario_id="combined"),
    ]

    cols = ("N", "scenario", "link_bytes", "edge_bytes/host", "hostmem", "traversals", "time_s")
    print(("{:>4} {:>12} {:>11} {:>15} {:>9} {:>10} {:>12}").format(*cols))
    for n in ns:
        if n > len(topo.hosts):
            print(f"  (skipping N={n}: topology has {len(topo.hosts)} hosts)")
            continue
        if args.elem_count % n:
            print(f"  (skipping N={n}: {args.elem_count} elements do not shard evenly)")
            continue
        spec = CollectiveSpec(
            kind=CollectiveKind.ALLREDUCE,
            comm=Communicator(tuple(f"h{i}" for i in range(n))),
            elem_count=args.elem_count,
            elem_type=ElemType.FP32,
        )
        inputs = {r: [float((r + j) % 17) for j in range(args.elem_count)] for r in range(n)}
        table = compare_methods(topo, spec, configs, inputs)
        for row in table.rows:
            print(
                f"{n:>4} {row.scenario_id:>12} {row.total_link_bytes:>11} "
                f"{row.edge_bytes_per_host:>15} {row.hostmem_bytes:>9} "
                f"{row.total_link_traversals:>10} {row.modeled_time_s:>12.3e}"
            )
        print(
            f"     ring/core-inc ratios: link={_f(table.ratios[2]['total_link_bytes'])} "
            f"edge={_f(table.ratios[2]['edge_bytes_per_host'])} "
            f"hostmem(plain/edge)={_f(table.ratios[1]['hostmem_bytes'])}"
        )
    return 0


def _f(x: float) -> str:
    return format(x, ".4g")


if __name__ == "__main__":
    raise SystemExit(main())
