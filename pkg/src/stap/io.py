"""Readers and writers for TNTP network and trip tables.

Node and zone numbers are 1-based in files and 0-based everywhere else;
the conversion happens here and nowhere else.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path as FilePath

import numpy as np

from .weights import WeightMatrix, read_weights, write_weights  # noqa: F401

log = logging.getLogger(__name__)

NETWORK_TAGS = ("NUMBER OF NODES", "NUMBER OF ZONES", "NUMBER OF LINKS",
                "FIRST THRU NODE")
KNOWN_NETWORK_TAGS = NETWORK_TAGS + ("ORIGINAL HEADER",)
TRIPS_TAGS = ("NUMBER OF ZONES", "TOTAL OD FLOW")

_TAG = re.compile(r"<([^>]*)>(.*)")


class TNTPError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    tail: int
    head: int
    capacity: float
    length: float
    free_flow_time: float
    bpr_b: float
    bpr_power: float
    speed_limit: float = 0.0
    toll: float = 0.0
    link_type: float = 1.0


@dataclass(frozen=True)
class Network:
    """Directed road network.  ``tail``/``head`` of each link are 0-based."""

    nodes: int
    zones: int
    first_thru_node: int  # 1-based, as in the file
    links: tuple[Link, ...]
    name: str = ""

    @property
    def n_links(self) -> int:
        return len(self.links)

    def _col(self, attr, dtype=float):
        return np.array([getattr(lk, attr) for lk in self.links], dtype=dtype)

    @cached_property
    def tail(self) -> np.ndarray:
        return self._col("tail", np.int64)

    @cached_property
    def head(self) -> np.ndarray:
        return self._col("head", np.int64)

    @cached_property
    def tail_list(self) -> list[int]:
        return self.tail.tolist()

    @cached_property
    def head_list(self) -> list[int]:
        return self.head.tolist()

    @cached_property
    def capacity(self) -> np.ndarray:
        return self._col("capacity")

    @cached_property
    def length(self) -> np.ndarray:
        return self._col("length")

    @cached_property
    def free_flow_time(self) -> np.ndarray:
        return self._col("free_flow_time")

    @cached_property
    def bpr_b(self) -> np.ndarray:
        return self._col("bpr_b")

    @cached_property
    def bpr_power(self) -> np.ndarray:
        return self._col("bpr_power")

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Outgoing link indices per node, in link order."""
        out = [[] for _ in range(self.nodes)]
        for i, lk in enumerate(self.links):
            out[lk.tail].append(i)
        return tuple(tuple(v) for v in out)

    @cached_property
    def incoming(self) -> tuple[tuple[int, ...], ...]:
        inc = [[] for _ in range(self.nodes)]
        for i, lk in enumerate(self.links):
            inc[lk.head].append(i)
        return tuple(tuple(v) for v in inc)

    @cached_property
    def through_blocked(self) -> np.ndarray:
        """Nodes that paths may start or end at but not pass through."""
        blocked = np.zeros(self.nodes, dtype=bool)
        blocked[: max(0, min(self.first_thru_node - 1, self.zones))] = True
        return blocked

    @cached_property
    def is_connector(self) -> np.ndarray:
        """Centroid connectors: links leaving a zone below the first thru node."""
        return np.array([lk.tail < self.zones and lk.tail < self.first_thru_node - 1
                         for lk in self.links], dtype=bool)

    def reverse_link(self) -> np.ndarray:
        """Index of the opposite-direction link for each link, or -1."""
        index = {}
        for i, lk in enumerate(self.links):
            index.setdefault((lk.tail, lk.head), i)
        return np.array([index.get((lk.head, lk.tail), -1) for lk in self.links],
                        dtype=np.int64)

    def parallel_pairs(self) -> list[tuple[int, int]]:
        seen = {}
        dup = []
        for i, lk in enumerate(self.links):
            key = (lk.tail, lk.head)
            if key in seen:
                dup.append((seen[key], i))
            else:
                seen[key] = i
        return dup


@dataclass(frozen=True)
class DemandMatrix:
    """Fixed OD demand, keyed by 0-based (origin, destination) zone pairs."""

    trips: dict[tuple[int, int], float]
    zones: int
    declared_total: float | None = None

    @property
    def total(self) -> float:
        return float(sum(self.trips.values()))

    @cached_property
    def by_origin(self) -> dict[int, tuple[tuple[int, float], ...]]:
        out: dict[int, list[tuple[int, float]]] = {}
        for (o, d), v in sorted(self.trips.items()):
            if v > 0:
                out.setdefault(o, []).append((d, v))
        return {o: tuple(v) for o, v in out.items()}

    def pairs(self) -> list[tuple[int, int, float]]:
        """Positive-demand OD pairs in lexicographic order."""
        return [(o, d, v) for (o, d), v in sorted(self.trips.items()) if v > 0]

    def scaled(self, factor: float) -> DemandMatrix:
        return DemandMatrix({k: v * factor for k, v in self.trips.items()},
                            self.zones)


def _read_metadata(lines, required, known):
    meta = {}
    for i, raw in enumerate(lines):
        s = raw.strip()
        if not s or s.startswith("~"):
            continue
        m = _TAG.match(s)
        if not m:
            raise TNTPError(f"unexpected line before <END OF METADATA>: {s!r}")
        tag, value = " ".join(m.group(1).split()).upper(), m.group(2).strip()
        if tag == "END OF METADATA":
            missing = [t for t in required if t not in meta]
            if missing:
                raise TNTPError(f"missing metadata tag <{missing[0]}>")
            return meta, i + 1
        if tag not in known:
            log.warning("ignoring unknown metadata tag <%s>", tag)
        meta[tag] = value
    raise TNTPError("missing metadata tag <END OF METADATA>")


def _int_tag(meta, tag):
    try:
        return int(float(meta[tag]))
    except ValueError:
        raise TNTPError(f"non-numeric value for <{tag}>: {meta[tag]!r}") from None


def parse_network(text: str, name: str = "") -> Network:
    lines = text.splitlines()
    meta, start = _read_metadata(lines, NETWORK_TAGS, KNOWN_NETWORK_TAGS)
    nodes = _int_tag(meta, "NUMBER OF NODES")
    zones = _int_tag(meta, "NUMBER OF ZONES")
    n_links = _int_tag(meta, "NUMBER OF LINKS")
    first_thru = _int_tag(meta, "FIRST THRU NODE")
    if zones > nodes:
        raise TNTPError(f"{zones} zones but only {nodes} nodes")

    body = " ".join(ln.split("~", 1)[0] for ln in lines[start:])
    links = []
    for row in body.split(";"):
        fields = row.split()
        if not fields:
            continue
        try:
            vals = [float(v) for v in fields]
        except ValueError:
            raise TNTPError(f"non-numeric link row: {row.strip()!r}") from None
        if len(vals) < 10:
            raise TNTPError(f"link row has {len(vals)} fields, need 10: {row.strip()!r}")
        tail, head = int(vals[0]), int(vals[1])
        for v in (tail, head):
            if not 1 <= v <= nodes:
                raise TNTPError(f"node {v} out of range 1..{nodes} in row {row.strip()!r}")
        if vals[2] <= 0:
            raise TNTPError(f"non-positive capacity in row {row.strip()!r}")
        links.append(Link(tail - 1, head - 1, *vals[2:10]))
    if len(links) != n_links:
        raise TNTPError(f"<NUMBER OF LINKS> is {n_links} but {len(links)} rows were read")
    net = Network(nodes, zones, first_thru, tuple(links), name)
    dup = net.parallel_pairs()
    if dup:
        log.warning("%s has %d parallel link(s)", name or "network", len(dup))
    return net


def validate_network(net: Network, allow_parallel: bool = False) -> None:
    if net.zones > net.nodes:
        raise TNTPError("more zones than nodes")
    for i, lk in enumerate(net.links):
        if not (0 <= lk.tail < net.nodes and 0 <= lk.head < net.nodes):
            raise TNTPError(f"link {i + 1} has a node out of range")
        if lk.capacity <= 0:
            raise TNTPError(f"link {i + 1} has non-positive capacity")
        if lk.length < 0 or lk.free_flow_time < 0 or lk.bpr_b < 0 or lk.bpr_power < 0:
            raise TNTPError(f"link {i + 1} has a negative cost parameter")
    if not allow_parallel and net.parallel_pairs():
        a, b = net.parallel_pairs()[0]
        raise TNTPError(f"links {a + 1} and {b + 1} join the same node pair")


def parse_trips(text: str, zones: int | None = None) -> DemandMatrix:
    lines = text.splitlines()
    meta, start = _read_metadata(lines, TRIPS_TAGS, TRIPS_TAGS)
    n_zones = _int_tag(meta, "NUMBER OF ZONES")
    declared = float(meta["TOTAL OD FLOW"])
    if zones is not None and zones != n_zones:
        raise TNTPError(f"trips file has {n_zones} zones, network has {zones}")

    trips: dict[tuple[int, int], float] = {}
    origin = None
    for raw in lines[start:]:
        s = raw.split("~", 1)[0].strip()
        if not s:
            continue
        if s.lower().startswith("origin"):
            parts = s.split()
            if len(parts) < 2:
                raise TNTPError(f"malformed origin line {s!r}")
            origin = int(parts[1])
            if not 1 <= origin <= n_zones:
                raise TNTPError(f"origin {origin} out of range 1..{n_zones}")
            continue
        if origin is None:
            raise TNTPError(f"destination entries before any Origin line: {s!r}")
        for tok in s.split(";"):
            tok = tok.strip()
            if not tok:
                continue
            dest, sep, flow = tok.partition(":")
            try:
                d, v = int(dest), float(flow)
            except ValueError:
                raise TNTPError(f"malformed 'dest : flow' entry {tok!r}") from None
            if not sep:
                raise TNTPError(f"malformed 'dest : flow' entry {tok!r}")
            if not 1 <= d <= n_zones:
                raise TNTPError(f"destination {d} out of range 1..{n_zones}")
            if v < 0:
                raise TNTPError(f"negative demand in entry {tok!r}")
            if v > 0:
                key = (origin - 1, d - 1)
                trips[key] = trips.get(key, 0.0) + v
    dm = DemandMatrix(trips, n_zones, declared)
    total = dm.total
    if abs(total - declared) > 1e-6 * max(1.0, abs(declared)):
        log.warning("trip total %.6f differs from declared <TOTAL OD FLOW> %.6f",
                    total, declared)
    return dm


def write_network(net: Network) -> str:
    out = [
        f"<NUMBER OF ZONES> {net.zones}",
        f"<NUMBER OF NODES> {net.nodes}",
        f"<FIRST THRU NODE> {net.first_thru_node}",
        f"<NUMBER OF LINKS> {net.n_links}",
        "<END OF METADATA>",
        "",
        "~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower"
        "\tspeed\ttoll\tlink_type\t;",
    ]
    for lk in net.links:
        nums = (lk.capacity, lk.length, lk.free_flow_time, lk.bpr_b, lk.bpr_power,
                lk.speed_limit, lk.toll, lk.link_type)
        out.append(f"\t{lk.tail + 1}\t{lk.head + 1}\t"
                   + "\t".join(f"{v:.17g}" for v in nums) + "\t;")
    return "\n".join(out) + "\n"


def write_trips(dm: DemandMatrix) -> str:
    out = [f"<NUMBER OF ZONES> {dm.zones}",
           f"<TOTAL OD FLOW> {dm.total:.17g}",
           "<END OF METADATA>", ""]
    for o, row in sorted(dm.by_origin.items()):
        out.append(f"Origin {o + 1}")
        out.append(" ".join(f"{d + 1} : {v:.17g};" for d, v in row))
        out.append("")
    return "\n".join(out) + "\n"


def load_network(path) -> Network:
    p = FilePath(path)
    return parse_network(p.read_text(), name=p.stem.replace("_net", ""))


def load_trips(path, zones: int | None = None) -> DemandMatrix:
    return parse_trips(FilePath(path).read_text(), zones)


def load_weights(path, validate: bool = True) -> WeightMatrix:
    return read_weights(FilePath(path).read_text(), validate=validate)
