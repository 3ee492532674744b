"""Poisson point sampling and truncated Voronoi street systems.

The simulation window is a square W1 surrounded by eight translated copies,
giving a 3x3 padded square W. Points are sampled on W, the Voronoi diagram
is built on W, and only streets that touch W1 are retained (with their full
geometry, never clipped).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .errors import ConstructionError, ParameterError

# Points closer than this are treated as duplicates of each other (metres).
MIN_POINT_SEPARATION = 1e-9

# Streets shorter than this are degenerate Voronoi artifacts and dropped.
_MIN_STREET_LENGTH = 1e-12


@dataclass(frozen=True)
class Window:
    """Concentric square simulation windows centred on the origin.

    ``inner_side`` is the side of the crossing window W1; the sampling
    window W is the 3x3 tiling of W1 (outer side = 3 * inner side).
    """

    inner_side: float

    def __post_init__(self):
        if not np.isfinite(self.inner_side) or self.inner_side < 0:
            raise ParameterError(f"window side must be finite and >= 0, got {self.inner_side}")

    @property
    def inner_half(self) -> float:
        return 0.5 * self.inner_side

    @property
    def outer_side(self) -> float:
        return 3.0 * self.inner_side

    @property
    def outer_half(self) -> float:
        return 1.5 * self.inner_side

    @property
    def inner_area(self) -> float:
        return self.inner_side**2

    @property
    def outer_area(self) -> float:
        return self.outer_side**2


@dataclass(frozen=True)
class StreetSystem:
    """Truncated Voronoi street system: crossroads, streets, adjacency.

    ``vertices`` is an (nv, 2) position array, ``streets`` an (ns, 2) array
    of endpoint vertex ids, ``lengths`` the (ns,) segment lengths, and
    ``adjacency[v]`` the tuple of street ids incident to vertex v.
    """

    vertices: np.ndarray
    streets: np.ndarray
    lengths: np.ndarray
    adjacency: tuple

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_streets(self) -> int:
        return len(self.streets)

    def street_endpoints(self, street_id: int) -> tuple[np.ndarray, np.ndarray]:
        va, vb = self.streets[street_id]
        return self.vertices[va], self.vertices[vb]


@dataclass(frozen=True)
class StreetStatistics:
    """Empirical window estimators of the tessellation statistics."""

    vertex_count: int
    vertex_intensity: float      # crossroads per m^2, compare 2*lambda_s
    total_length: float          # street length inside W1, metres
    line_intensity: float        # street length per m^2, compare 2*sqrt(lambda_s)
    mean_street_length: float    # metres, compare 2/(3*sqrt(lambda_s))
    sampled_streets: int         # streets entering the mean-length estimate


def sample_poisson_points(intensity: float, window: Window, rng) -> np.ndarray:
    """Sample a homogeneous Poisson point process on the padded window W.

    ``rng`` is a seed or a ``numpy.random.Generator``; the draw is
    deterministic given the generator state.
    """
    if not np.isfinite(intensity) or intensity <= 0:
        raise ParameterError(f"point process intensity must be > 0, got {intensity}")
    rng = np.random.default_rng(rng)
    half = window.outer_half
    n = rng.poisson(intensity * window.outer_area)
    return rng.uniform(-half, half, size=(n, 2))


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Closed segment-segment intersection test (collinear touching counts)."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
            and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0):
        return True
    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


def point_in_square(point, half: float) -> bool:
    return abs(point[0]) <= half and abs(point[1]) <= half


def segment_intersects_square(p, q, half: float) -> bool:
    """True iff the closed segment pq meets the closed square [-half, half]^2."""
    if point_in_square(p, half) or point_in_square(q, half):
        return True
    corners = [(-half, -half), (half, -half), (half, half), (-half, half)]
    for i in range(4):
        if _segments_intersect(p, q, corners[i], corners[(i + 1) % 4]):
            return True
    return False


def clipped_length(p, q, half: float) -> float:
    """Length of the part of segment pq inside the square [-half, half]^2.

    Liang-Barsky parametric clipping.
    """
    d = (q[0] - p[0], q[1] - p[1])
    t0, t1 = 0.0, 1.0
    for coord in (0, 1):
        for sign in (-1.0, 1.0):
            # half-plane sign*x_coord <= half
            denom = sign * d[coord]
            num = half - sign * p[coord]
            if denom == 0.0:
                if num < 0.0:
                    return 0.0
            else:
                t = num / denom
                if denom > 0.0:
                    t1 = min(t1, t)
                else:
                    t0 = max(t0, t)
            if t0 > t1:
                return 0.0
    return (t1 - t0) * float(np.hypot(d[0], d[1]))


def _dedupe_points(points: np.ndarray) -> np.ndarray:
    """Drop points closer than MIN_POINT_SEPARATION to an earlier point."""
    tree = cKDTree(points)
    pairs = tree.query_pairs(MIN_POINT_SEPARATION, output_type="ndarray")
    if len(pairs) == 0:
        return points
    drop = np.zeros(len(points), dtype=bool)
    drop[pairs.max(axis=1)] = True
    return points[~drop]


def build_street_system(points: np.ndarray, window: Window) -> StreetSystem:
    """Build the truncated Poisson-Voronoi street system.

    Keeps exactly the bounded Voronoi edges that lie inside W1 or intersect
    its boundary, with their full (unclipped) geometry. Raises
    ConstructionError if an unbounded edge would reach W1 (the padding is
    then too small for the given intensity).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ConstructionError("points must be an (n, 2) array")
    points = _dedupe_points(points)
    if len(points) < 3:
        raise ConstructionError(
            f"need at least 3 distinct points to build a street system, got {len(points)}")

    vor = Voronoi(points)
    half1 = window.inner_half
    verts = vor.vertices
    ridge_vertices = np.asarray(vor.ridge_vertices)
    ridge_points = np.asarray(vor.ridge_points)

    unbounded = (ridge_vertices == -1).any(axis=1)
    _check_unbounded_ridges(vor, ridge_points[unbounded],
                            ridge_vertices[unbounded], half1, window)

    rv = ridge_vertices[~unbounded]
    p = verts[rv[:, 0]]
    q = verts[rv[:, 1]]

    # Fast vectorized filters: fully inside keeps, disjoint bounding box drops.
    p_in = (np.abs(p) <= half1).all(axis=1)
    q_in = (np.abs(q) <= half1).all(axis=1)
    keep = p_in & q_in
    bbox_hit = ((np.minimum(p, q) <= half1) & (np.maximum(p, q) >= -half1)).all(axis=1)
    ambiguous = np.nonzero(bbox_hit & ~keep)[0]
    keep = keep.copy()
    for i in ambiguous:
        keep[i] = segment_intersects_square(p[i], q[i], half1)

    kept = rv[keep]
    lengths = np.hypot(*(verts[kept[:, 0]] - verts[kept[:, 1]]).T)
    nonzero = lengths > _MIN_STREET_LENGTH
    kept = kept[nonzero]
    lengths = lengths[nonzero]

    # Compact vertex re-indexing over retained streets only.
    used, streets_flat = np.unique(kept, return_inverse=True)
    streets = streets_flat.reshape(kept.shape).astype(np.int64)
    vertices = verts[used]

    adjacency = [[] for _ in range(len(vertices))]
    for sid, (va, vb) in enumerate(streets):
        adjacency[va].append(sid)
        adjacency[vb].append(sid)

    return StreetSystem(
        vertices=vertices,
        streets=streets,
        lengths=lengths,
        adjacency=tuple(tuple(a) for a in adjacency),
    )


def _check_unbounded_ridges(vor, ridge_points, ridge_vertices, half1, window):
    """Error out if any unbounded Voronoi edge could touch W1."""
    if len(ridge_points) == 0:
        return
    center = vor.points.mean(axis=0)
    reach = 10.0 * max(window.outer_side, 1.0)
    for (pi, pj), (va, vb) in zip(ridge_points, ridge_vertices):
        v = vb if va == -1 else va
        base = vor.vertices[v]
        t = vor.points[pj] - vor.points[pi]
        t = t / np.hypot(*t)
        normal = np.array([-t[1], t[0]])
        midpoint = 0.5 * (vor.points[pi] + vor.points[pj])
        if np.dot(midpoint - center, normal) < 0:
            normal = -normal
        far = base + normal * reach
        if segment_intersects_square(base, far, half1):
            raise ConstructionError(
                "an unbounded Voronoi edge reaches the inner window; "
                "increase the point intensity or the window padding")


def street_statistics(system: StreetSystem, window: Window) -> StreetStatistics:
    """Window estimators of vertex intensity, line intensity and mean length.

    Vertex intensity counts crossroads inside W1; line intensity uses street
    length clipped to W1. The mean street length samples streets by their
    midpoint falling in W1 (an associated-point estimator; conditioning on
    full containment instead under-counts long streets near the boundary).
    """
    if system.n_streets == 0 or window.inner_area == 0:
        return StreetStatistics(0, 0.0, 0.0, 0.0, 0.0, 0)
    half1 = window.inner_half
    area = window.inner_area

    v_in = (np.abs(system.vertices) <= half1).all(axis=1)
    vertex_count = int(v_in.sum())

    p = system.vertices[system.streets[:, 0]]
    q = system.vertices[system.streets[:, 1]]
    total = sum(clipped_length(p[i], q[i], half1) for i in range(system.n_streets))

    mid_in = (np.abs(0.5 * (p + q)) <= half1).all(axis=1)
    sampled = int(mid_in.sum())
    mean_len = float(system.lengths[mid_in].mean()) if sampled else 0.0

    return StreetStatistics(
        vertex_count=vertex_count,
        vertex_intensity=vertex_count / area,
        total_length=float(total),
        line_intensity=float(total) / area,
        mean_street_length=mean_len,
        sampled_streets=sampled,
    )


def street_system_to_dict(system: StreetSystem) -> dict:
    """JSON-ready dump: vertices with positions, streets with endpoints."""
    return {
        "vertices": [
            {"id": i, "x": float(x), "y": float(y)}
            for i, (x, y) in enumerate(system.vertices)
        ],
        "streets": [
            {"id": i, "v1": int(va), "v2": int(vb), "length": float(system.lengths[i])}
            for i, (va, vb) in enumerate(system.streets)
        ],
    }
