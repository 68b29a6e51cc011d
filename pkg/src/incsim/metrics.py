"""Run accounting shared by the endpoint engine and the in-network runs.

A Metrics record aggregates one run: link traffic (with the max-loaded
link), host-memory bus traffic, round count, modeled time, numerical error
against the exact oracle, and the result digest. It serializes to a flat
JSON object and to a CSV row with a fixed, documented column order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

from .topology import LinkLedger

__all__ = ["HostMemLedger", "Metrics", "CSV_COLUMNS", "csv_header", "fmt_float"]

CSV_COLUMNS = (
    "scenario_id",
    "method",
    "N",
    "elem_type",
    "total_link_bytes",
    "max_link_bytes",
    "edge_bytes_per_host",
    "hostmem_bytes",
    "rounds",
    "modeled_time_s",
    "max_abs_err",
    "max_rel_err",
    "digest",
)


def fmt_float(x: float) -> str:
    """CSV float format: '.' decimal, no separators, 6 significant digits."""
    return format(float(x), ".6g")


@dataclass
class HostMemLedger:
    """Host memory/bus bytes per host, split into writes and reads."""

    bytes_written: Dict[str, int] = field(default_factory=dict)
    bytes_read: Dict[str, int] = field(default_factory=dict)

    def record_write(self, host: str, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("bytes must be >= 0")
        self.bytes_written[host] = self.bytes_written.get(host, 0) + nbytes

    def record_read(self, host: str, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("bytes must be >= 0")
        self.bytes_read[host] = self.bytes_read.get(host, 0) + nbytes

    def total_bytes(self) -> int:
        return sum(self.bytes_written.values()) + sum(self.bytes_read.values())

    def bytes_for(self, host: str) -> int:
        return self.bytes_written.get(host, 0) + self.bytes_read.get(host, 0)


@dataclass
class Metrics:
    scenario_id: str
    method: str
    nranks: int
    elem_type: str
    link: LinkLedger
    hostmem: HostMemLedger
    edge_bytes_per_host: int
    rounds: int
    modeled_time_s: float
    max_abs_err: float
    max_rel_err: float
    digest: str
    extras: dict = field(default_factory=dict)

    @property
    def total_link_bytes(self) -> int:
        return self.link.total_bytes()

    @property
    def max_link_bytes(self) -> int:
        return self.link.max_bytes()

    @property
    def total_link_traversals(self) -> int:
        return self.link.total_traversals()

    @property
    def hostmem_bytes(self) -> int:
        return self.hostmem.total_bytes()

    def csv_row(self) -> list:
        return [
            self.scenario_id,
            self.method,
            str(self.nranks),
            self.elem_type,
            str(self.total_link_bytes),
            str(self.max_link_bytes),
            str(self.edge_bytes_per_host),
            str(self.hostmem_bytes),
            str(self.rounds),
            fmt_float(self.modeled_time_s),
            fmt_float(self.max_abs_err),
            fmt_float(self.max_rel_err),
            self.digest,
        ]

    def to_json_dict(self) -> dict:
        doc = {
            "scenario_id": self.scenario_id,
            "method": self.method,
            "N": self.nranks,
            "elem_type": self.elem_type,
            "total_link_bytes": self.total_link_bytes,
            "max_link_bytes": self.max_link_bytes,
            "edge_bytes_per_host": self.edge_bytes_per_host,
            "hostmem_bytes": self.hostmem_bytes,
            "rounds": self.rounds,
            "modeled_time_s": self.modeled_time_s,
            "max_abs_err": self.max_abs_err,
            "max_rel_err": self.max_rel_err,
            "digest": self.digest,
        }
        for key in sorted(self.extras):
            doc[key] = self.extras[key]
        return doc


def csv_header() -> list:
    return list(CSV_COLUMNS)
