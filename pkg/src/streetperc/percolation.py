"""Open-street graph, window crossings, and connection-probability estimates.

Connectivity in the SINR model is non-monotonic, so components are
recomputed from scratch for every realization rather than maintained
incrementally.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .geometry import StreetSystem, Window, build_street_system, sample_poisson_points
from .placement import (LABEL_POINTS, Deployment, NetworkParams, deploy,
                        substream)
from .propagation import SinrContext

SIDES = ("north", "east", "south", "west")


@dataclass(frozen=True)
class OpenGraph:
    """Open streets with connected-component labels.

    ``component_of[s]`` is the component label of open street s, or -1 for
    closed streets. Two open streets share a label iff they are joined by a
    path of open streets through shared (present) relays.
    """

    open_streets: np.ndarray
    component_of: np.ndarray
    n_components: int


@dataclass(frozen=True)
class BoundarySets:
    """Street ids intersecting each side of the inner window W1."""

    north: frozenset
    east: frozenset
    south: frozenset
    west: frozenset

    def side(self, name: str) -> frozenset:
        return getattr(self, name)


@dataclass(frozen=True)
class RealizationOutcome:
    system: StreetSystem
    deployment: Deployment
    verdicts: tuple
    open_graph: OpenGraph
    boundary: BoundarySets
    vertical: bool
    horizontal: bool

    @property
    def percolates(self) -> bool:
        return self.vertical or self.horizontal


def build_open_graph(system: StreetSystem, deployment: Deployment,
                     params: NetworkParams, verdicts=None) -> OpenGraph:
    """Label connected components of the open streets via union-find.

    Open streets always have both endpoint relays present, so sharing an
    endpoint vertex is the same as meeting at a present relay.
    """
    if verdicts is None:
        verdicts = SinrContext(system, deployment, params).all_verdicts()
    open_ids = np.array([v.street_id for v in verdicts if v.is_open], dtype=np.int64)
    component_of = np.full(system.n_streets, -1, dtype=np.int64)
    if len(open_ids) == 0:
        return OpenGraph(open_ids, component_of, 0)

    parent = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for sid in open_ids:
        va, vb = system.streets[sid]
        parent.setdefault(va, va)
        parent.setdefault(vb, vb)
        parent[find(va)] = find(vb)

    labels = {}
    for sid in open_ids:
        root = find(system.streets[sid][0])
        labels.setdefault(root, len(labels))
        component_of[sid] = labels[root]
    return OpenGraph(open_ids, component_of, len(labels))


def boundary_streets(system: StreetSystem, window: Window) -> BoundarySets:
    """Streets whose segment meets each of the four sides of W1 (closed)."""
    h = window.inner_half
    p = system.vertices[system.streets[:, 0]]
    q = system.vertices[system.streets[:, 1]]
    sets = {}
    # Sides as (axis, level): north y=+h, east x=+h, south y=-h, west x=-h.
    for name, axis, level in (("north", 1, h), ("east", 0, h),
                              ("south", 1, -h), ("west", 0, -h)):
        other = 1 - axis
        a = p[:, axis] - level
        b = q[:, axis] - level
        hits = set()
        crossing = np.nonzero((a * b <= 0) & ((a != 0) | (b != 0)))[0]
        for i in crossing:
            t = a[i] / (a[i] - b[i])
            u = p[i, other] + t * (q[i, other] - p[i, other])
            if -h <= u <= h:
                hits.add(int(i))
        collinear = np.nonzero((a == 0) & (b == 0))[0]
        for i in collinear:
            lo = min(p[i, other], q[i, other])
            hi = max(p[i, other], q[i, other])
            if lo <= h and hi >= -h:
                hits.add(int(i))
        sets[name] = frozenset(hits)
    return BoundarySets(**sets)


def detect_crossing(open_graph: OpenGraph,
                    boundary: BoundarySets) -> tuple[bool, bool]:
    """(vertical, horizontal): a component touches both opposite sides."""

    def labels(side: frozenset) -> set:
        return {int(open_graph.component_of[s]) for s in side
                if open_graph.component_of[s] >= 0}

    vertical = bool(labels(boundary.north) & labels(boundary.south))
    horizontal = bool(labels(boundary.east) & labels(boundary.west))
    return vertical, horizontal


def simulate_realization(params: NetworkParams, window: Window,
                         master_seed: int,
                         replication_index: int = 0) -> RealizationOutcome:
    """Full pipeline: sample, build, place, verdicts, components, crossings."""
    points = sample_poisson_points(
        params.street_intensity, window,
        substream(master_seed, LABEL_POINTS, replication_index))
    system = build_street_system(points, window)
    deployment = deploy(system, params, master_seed, replication_index)
    verdicts = tuple(SinrContext(system, deployment, params).all_verdicts())
    open_graph = build_open_graph(system, deployment, params, verdicts)
    boundary = boundary_streets(system, window)
    vertical, horizontal = detect_crossing(open_graph, boundary)
    return RealizationOutcome(system, deployment, verdicts, open_graph,
                              boundary, vertical, horizontal)


def wilson_interval(successes: int, n: int,
                    z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    margin = (z / denom) * sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    lo = 0.0 if successes == 0 else max(0.0, center - margin)
    hi = 1.0 if successes == n else min(1.0, center + margin)
    return lo, hi


@dataclass(frozen=True)
class ConnectionEstimate:
    probability: float
    ci_low: float
    ci_high: float
    successes: int
    replications: int


def _replication_percolates(args) -> bool:
    params, window, master_seed, index = args
    return simulate_realization(params, window, master_seed, index).percolates


def estimate_connection_probability(params: NetworkParams, window: Window,
                                    replications: int, master_seed: int,
                                    workers: int | None = None) -> ConnectionEstimate:
    """Fraction of independent replications with a window crossing.

    Replications use disjoint substreams indexed by replication number, so
    the estimate is identical for any worker count.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    jobs = [(params, window, master_seed, i) for i in range(replications)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(_replication_percolates, jobs, chunksize=8))
    else:
        flags = [_replication_percolates(j) for j in jobs]
    successes = int(sum(flags))
    lo, hi = wilson_interval(successes, replications)
    return ConnectionEstimate(successes / replications, lo, hi,
                              successes, replications)


def outcome_to_dict(outcome: RealizationOutcome) -> dict:
    """Realization JSON: geometry, deployment, verdicts, crossing flags."""
    from .geometry import street_system_to_dict
    from .placement import deployment_to_dict
    from .propagation import verdicts_to_list

    doc = street_system_to_dict(outcome.system)
    doc.update(deployment_to_dict(outcome.system, outcome.deployment))
    doc["verdicts"] = verdicts_to_list(outcome.verdicts)
    doc["vertical_crossing"] = outcome.vertical
    doc["horizontal_crossing"] = outcome.horizontal
    doc["percolates"] = outcome.percolates
    return doc
