"""Multi-level fat trees with deterministic routing and per-link accounting.

The tree is parameterized per level: switches at level L (1-based above the
leaves) have `down_ports[L-1]` children each, and switches at level L below
the top have `up_ports[L]` parents each. Hosts hang off level-0 (leaf)
switches. Switch counts follow the generalized fat-tree construction:

  leaves                 = product(down_ports)
  switches at level i    = product(down_ports[i:]) * product(up_ports[:i])
  hosts                  = hosts_per_leaf * leaves

Ids are deterministic: hosts "h0".."h{H-1}" left to right, switches
"s0".."s{S-1}" level-major (all leaf switches first). Every leaf's ancestor
set at level i is the full switch group of its level-i subtree, so any
upward walk that stays in the destination's subtree can turn downward, and
the downward path to a given host is unique. Routes climb to the lowest
common ancestor level, choosing among parallel up-links by destination id
modulo fan-out, then descend along the unique downward path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple

__all__ = [
    "FatTreeParams",
    "Topology",
    "Route",
    "LinkLedger",
    "build_fat_tree",
    "route",
    "record_traffic",
]

NodeId = str
Link = Tuple[NodeId, NodeId]


def _as_port_tuple(value, count: int, name: str) -> tuple:
    if isinstance(value, int):
        return (value,) * count
    t = tuple(int(v) for v in value)
    if len(t) != count:
        raise ValueError(f"{name} needs one entry per applicable level ({count}), got {len(t)}")
    return t


@dataclass(frozen=True)
class FatTreeParams:
    """Shape of a fat tree; scalar ports are replicated across levels.

    A full-bisection 2-level tree has up_ports == hosts_per_leaf. Smaller
    up_ports values oversubscribe the core.
    """

    levels: int
    hosts_per_leaf: int
    down_ports: object = ()
    up_ports: object = ()

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.hosts_per_leaf < 1:
            raise ValueError("hosts_per_leaf must be >= 1")
        n = self.levels - 1
        down = _as_port_tuple(self.down_ports, n, "down_ports")
        up = _as_port_tuple(self.up_ports, n, "up_ports")
        for p in down:
            if p < 1:
                raise ValueError("down_ports entries must be >= 1")
        for p in up:
            if p < 1:
                raise ValueError("up_ports entries must be >= 1")
        object.__setattr__(self, "down_ports", down)
        object.__setattr__(self, "up_ports", up)

    @property
    def leaf_count(self) -> int:
        return math.prod(self.down_ports)

    @property
    def host_count(self) -> int:
        return self.hosts_per_leaf * self.leaf_count


@dataclass(frozen=True)
class Route:
    """A directed host-to-host path as consecutive directed links."""

    links: tuple

    def __post_init__(self):
        for (a, b), (c, d) in zip(self.links, self.links[1:]):
            if b != c:
                raise ValueError("route links must be consecutive")

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self):
        return iter(self.links)


@dataclass
class Topology:
    params: FatTreeParams
    hosts: tuple
    switches: tuple
    switch_level: dict
    links: frozenset
    up_nbrs: dict      # node -> parents, ascending numeric id
    down_nbrs: dict    # switch -> children (switches or hosts), ascending
    host_leaf: dict
    # per-level structure used by routing (see module docstring)
    level_offset: tuple
    slots_per_subtree: tuple   # switches at level i inside one level-i subtree
    leaves_per_subtree: tuple  # leaf switches inside one level-i subtree

    def host_index(self, host: NodeId) -> int:
        if host not in self.host_leaf:
            raise KeyError(f"unknown host {host!r}")
        return int(host[1:])

    def switch_id(self, level: int, group: int, slot: int) -> NodeId:
        return f"s{self.level_offset[level] + group * self.slots_per_subtree[level] + slot}"

    def switch_coords(self, switch: NodeId) -> tuple:
        num = int(switch[1:])
        level = self.switch_level[switch]
        rel = num - self.level_offset[level]
        return level, rel // self.slots_per_subtree[level], rel % self.slots_per_subtree[level]

    def host_uplink(self, host: NodeId) -> Link:
        return (host, self.host_leaf[host])

    def summary(self) -> dict:
        per_level = [0] * self.params.levels
        for s in self.switches:
            per_level[self.switch_level[s]] += 1
        return {
            "levels": self.params.levels,
            "hosts": len(self.hosts),
            "switches": len(self.switches),
            "switches_per_level": per_level,
            "directed_links": len(self.links),
            "hosts_per_leaf": self.params.hosts_per_leaf,
            "down_ports": list(self.params.down_ports),
            "up_ports": list(self.params.up_ports),
        }


def build_fat_tree(params: FatTreeParams) -> Topology:
    levels = params.levels
    down, up = params.down_ports, params.up_ports

    slots = [1] * levels  # switches per subtree at its own level
    for i in range(1, levels):
        slots[i] = slots[i - 1] * up[i - 1]
    leaves_per = [1] * levels  # leaf switches under one level-i subtree
    for i in range(1, levels):
        leaves_per[i] = leaves_per[i - 1] * down[i - 1]
    subtrees = [0] * levels  # number of level-i subtrees
    for i in range(levels):
        subtrees[i] = math.prod(down[i:]) if i < levels - 1 else 1

    counts = [subtrees[i] * slots[i] for i in range(levels)]
    offsets = []
    acc = 0
    for c in counts:
        offsets.append(acc)
        acc += c

    switch_level = {}
    switches = []
    for lvl in range(levels):
        for k in range(counts[lvl]):
            sid = f"s{offsets[lvl] + k}"
            switches.append(sid)
            switch_level[sid] = lvl

    hosts = tuple(f"h{i}" for i in range(params.host_count))
    host_leaf = {h: f"s{int(h[1:]) // params.hosts_per_leaf}" for h in hosts}

    links = set()
    up_nbrs: Dict[NodeId, list] = {n: [] for n in switches}
    down_nbrs: Dict[NodeId, list] = {n: [] for n in switches}
    for h in hosts:
        leaf = host_leaf[h]
        links.add((h, leaf))
        links.add((leaf, h))
        down_nbrs[leaf].append(h)
        up_nbrs[h] = [leaf]

    for lvl in range(1, levels):
        m, w = down[lvl - 1], up[lvl - 1]
        child_slots = slots[lvl - 1]
        for g_child in range(subtrees[lvl - 1]):
            g_parent = g_child // m
            for s_child in range(child_slots):
                child = f"s{offsets[lvl - 1] + g_child * child_slots + s_child}"
                for t in range(w):
                    parent_slot = s_child + t * child_slots
                    parent = f"s{offsets[lvl] + g_parent * slots[lvl] + parent_slot}"
                    links.add((child, parent))
                    links.add((parent, child))
                    up_nbrs[child].append(parent)
                    down_nbrs[parent].append(child)

    def num_key(node: NodeId) -> int:
        return int(node[1:])

    topo = Topology(
        params=params,
        hosts=hosts,
        switches=tuple(switches),
        switch_level=switch_level,
        links=frozenset(links),
        up_nbrs={n: tuple(sorted(v, key=num_key)) for n, v in up_nbrs.items()},
        down_nbrs={n: tuple(sorted(v, key=num_key)) for n, v in down_nbrs.items()},
        host_leaf=host_leaf,
        level_offset=tuple(offsets),
        slots_per_subtree=tuple(slots),
        leaves_per_subtree=tuple(leaves_per),
    )
    return topo


def lca_level(topo: Topology, leaf_a: NodeId, leaf_b: NodeId) -> int:
    """Lowest level whose subtree contains both leaf switches (0 if equal)."""
    ia, ib = int(leaf_a[1:]), int(leaf_b[1:])
    if ia == ib:
        return 0
    for lvl in range(1, topo.params.levels):
        per = topo.leaves_per_subtree[lvl]
        if ia // per == ib // per:
            return lvl
    raise ValueError("leaves do not share a subtree; malformed topology")


def route(topo: Topology, src: NodeId, dst: NodeId) -> Route:
    """Deterministic up/down route between two hosts.

    Up-link choice at each level is destination host id modulo the fan-out;
    the downward path is unique. src == dst is an error.
    """
    if src == dst:
        raise ValueError("route requires distinct hosts")
    for h in (src, dst):
        if h not in topo.host_leaf:
            raise KeyError(f"unknown host {h!r}")
    leaf_s, leaf_d = topo.host_leaf[src], topo.host_leaf[dst]
    if leaf_s == leaf_d:
        return Route(((src, leaf_s), (leaf_s, dst)))
    top = lca_level(topo, leaf_s, leaf_d)
    dst_num = topo.host_index(dst)
    links = [(src, leaf_s)]
    node = leaf_s
    for _ in range(top):
        parents = topo.up_nbrs[node]
        nxt = parents[dst_num % len(parents)]
        links.append((node, nxt))
        node = nxt
    dst_leaf_num = int(leaf_d[1:])
    for lvl in range(top, 0, -1):
        _, _, slot = topo.switch_coords(node)
        child_slots = topo.slots_per_subtree[lvl - 1]
        child_group = dst_leaf_num // topo.leaves_per_subtree[lvl - 1]
        child = topo.switch_id(lvl - 1, child_group, slot % child_slots)
        links.append((node, child))
        node = child
    links.append((node, dst))
    return Route(tuple(links))


@dataclass
class LinkLedger:
    """Per directed link: accumulated payload bytes and traversal counts."""

    bytes_by_link: dict = field(default_factory=dict)
    traversals_by_link: dict = field(default_factory=dict)

    def record_link(self, link: Link, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("bytes must be >= 0")
        self.bytes_by_link[link] = self.bytes_by_link.get(link, 0) + nbytes
        self.traversals_by_link[link] = self.traversals_by_link.get(link, 0) + 1

    def record(self, links: Iterable[Link], nbytes: int) -> None:
        for link in links:
            self.record_link(link, nbytes)

    def total_bytes(self) -> int:
        return sum(self.bytes_by_link.values())

    def max_bytes(self) -> int:
        return max(self.bytes_by_link.values(), default=0)

    def total_traversals(self) -> int:
        return sum(self.traversals_by_link.values())

    def bytes_on(self, link: Link) -> int:
        return self.bytes_by_link.get(link, 0)


def record_traffic(ledger: LinkLedger, route_: Route, nbytes: int) -> LinkLedger:
    """Charge `nbytes` to every link along the route; returns the ledger."""
    ledger.record(route_, nbytes)
    return ledger
