"""Planar convex-polygon kernel.

Bodies are intersections of half-planes {x : <x, u_i> <= h_i} with unit
normals u_i given by sorted angles.  All values are plain floats / numpy
arrays; unit vectors are represented by their angle in [0, 2*pi).
Everything here is immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBodyError,
    EmptyBodyError,
    NotClosedUnderGroupError,
    UnboundedError,
)

TWO_PI = 2.0 * math.pi

# Tolerance regime (absolute, for coordinates of order one; callers at other
# scales pre-normalize).
ANGLE_TOL = 1e-12     # sorting / dedup of normal angles
GEOM_TOL = 1e-10      # vertex / constraint satisfaction
EDGE_TOL = 1e-12      # edges shorter than this are flagged inactive


def canonical_angle(theta: float) -> float:
    """Map an angle to [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:  # fmod roundoff at the seam
        t = 0.0
    return t


def canonical_angles(thetas) -> np.ndarray:
    t = np.asarray(thetas, dtype=float) % TWO_PI
    t[t >= TWO_PI] = 0.0
    return t


def circular_distance(a: float, b: float) -> float:
    """Arc-length distance between two directions."""
    d = abs(canonical_angle(a) - canonical_angle(b))
    return min(d, TWO_PI - d)


def angles_antipodal(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    return abs(circular_distance(a, b) - math.pi) <= tol


def unit_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def unit_vectors(thetas) -> np.ndarray:
    t = np.asarray(thetas, dtype=float)
    return np.column_stack([np.cos(t), np.sin(t)])


def circular_gaps(sorted_thetas: np.ndarray) -> np.ndarray:
    """Gaps between consecutive sorted angles, wrapping around 2*pi."""
    t = np.asarray(sorted_thetas, dtype=float)
    if t.size == 0:
        return np.array([])
    if t.size == 1:
        return np.array([TWO_PI])
    g = np.diff(t)
    return np.append(g, t[0] + TWO_PI - t[-1])


@dataclass(frozen=True)
class Isometry2:
    """Orthogonal map of the plane: rotation by `parameter` or reflection
    across the line through the origin at axis angle `parameter`."""

    kind: str  # "rotation" | "reflection"
    parameter: float

    def __post_init__(self):
        if self.kind not in ("rotation", "reflection"):
            raise ValueError(f"unknown isometry kind {self.kind!r}")

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.parameter), math.sin(self.parameter)
        if self.kind == "rotation":
            return np.array([[c, -s], [s, c]])
        c2, s2 = math.cos(2 * self.parameter), math.sin(2 * self.parameter)
        return np.array([[c2, s2], [s2, -c2]])

    def apply_angle(self, theta: float) -> float:
        if self.kind == "rotation":
            return canonical_angle(theta + self.parameter)
        return canonical_angle(2.0 * self.parameter - theta)

    def apply_angles(self, thetas) -> np.ndarray:
        t = np.asarray(thetas, dtype=float)
        if self.kind == "rotation":
            return canonical_angles(t + self.parameter)
        return canonical_angles(2.0 * self.parameter - t)

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=float) @ self.matrix.T

    def compose(self, other: "Isometry2") -> "Isometry2":
        """self after other.  Reflection axes are canonical modulo pi (the
        axis is a line, not a direction)."""
        if self.kind == "rotation" and other.kind == "rotation":
            return Isometry2("rotation", canonical_angle(self.parameter + other.parameter))
        if self.kind == "rotation" and other.kind == "reflection":
            return Isometry2(
                "reflection",
                canonical_angle(other.parameter + self.parameter / 2.0) % math.pi,
            )
        if self.kind == "reflection" and other.kind == "rotation":
            return Isometry2(
                "reflection",
                canonical_angle(self.parameter - other.parameter / 2.0) % math.pi,
            )
        # reflection o reflection = rotation by twice the axis difference
        return Isometry2("rotation", canonical_angle(2.0 * (self.parameter - other.parameter)))

    def inverse(self) -> "Isometry2":
        if self.kind == "rotation":
            return Isometry2("rotation", canonical_angle(-self.parameter))
        return self  # reflections are involutions

    def is_identity(self, tol: float = ANGLE_TOL) -> bool:
        return self.kind == "rotation" and (
            self.parameter <= tol or TWO_PI - self.parameter <= tol
        )

    def same_action(self, other: "Isometry2", tol: float = 1e-9) -> bool:
        """Equality as maps: rotations modulo 2*pi, reflections modulo pi."""
        if self.kind != other.kind:
            return False
        d = abs(self.parameter - other.parameter)
        period = math.pi if self.kind == "reflection" else TWO_PI
        d = d % period
        return min(d, period - d) <= tol


IDENTITY = Isometry2("rotation", 0.0)


@dataclass(frozen=True)
class SymmetryGroup:
    """Finite subgroup of O(2): trivial, cyclic C_k, or dihedral D_k with a
    distinguished reflection-axis angle."""

    kind: str  # "trivial" | "cyclic" | "dihedral"
    order_k: int = 1
    axis: float = 0.0

    def __post_init__(self):
        if self.kind not in ("trivial", "cyclic", "dihedral"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind != "trivial" and self.order_k < 1:
            raise ValueError("group order must be >= 1")

    @classmethod
    def trivial(cls) -> "SymmetryGroup":
        return cls("trivial")

    @classmethod
    def cyclic(cls, k: int) -> "SymmetryGroup":
        return cls("trivial") if k <= 1 else cls("cyclic", k)

    @classmethod
    def dihedral(cls, k: int, axis: float = 0.0) -> "SymmetryGroup":
        return cls("dihedral", max(k, 1), canonical_angle(axis))

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    def elements(self) -> list[Isometry2]:
        if self.kind == "trivial":
            return [IDENTITY]
        k = self.order_k
        rots = [Isometry2("rotation", canonical_angle(TWO_PI * j / k)) for j in range(k)]
        if self.kind == "cyclic":
            return rots
        refls = [
            Isometry2("reflection", canonical_angle(self.axis + math.pi * j / k))
            for j in range(k)
        ]
        return rots + refls

    def label(self) -> str:
        if self.kind == "trivial":
            return "trivial"
        if self.kind == "cyclic":
            return f"C{self.order_k}"
        return f"D{self.order_k}:{self.axis:.12g}"


@dataclass
class Polygon:
    """Convex body from support data.

    normals: sorted angles in [0, 2*pi), pairwise distinct.
    support: support numbers h_i (one per normal).
    vertices: counterclockwise vertex chain.
    active: normals whose constraint carries an edge longer than EDGE_TOL.
    lengths: per-normal edge length (0 for normals not on the boundary).
    edge_ends: per-normal (start, end) vertex pair, NaN rows when absent.
    """

    normals: np.ndarray
    support: np.ndarray
    vertices: np.ndarray
    active: np.ndarray
    lengths: np.ndarray
    edge_ends: np.ndarray  # shape (N, 2, 2)

    @property
    def n(self) -> int:
        return len(self.normals)

    def support_values(self, thetas) -> np.ndarray:
        """Exact support function h_P at the given directions."""
        return polygon_support(self.vertices, thetas)

    def contains_origin(self, tol: float = GEOM_TOL) -> bool:
        return bool(np.all(self.support[self.active] >= -tol))

    def diameter(self) -> float:
        v = self.vertices
        if len(v) <= 1:
            return 0.0
        # O(V^2) is fine below ~2000 vertices; chunk otherwise.
        if len(v) <= 2048:
            d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
            return float(math.sqrt(d2.max()))
        best = 0.0
        for i in range(0, len(v), 512):
            blk = v[i : i + 512]
            d2 = np.sum((blk[:, None, :] - v[None, :, :]) ** 2, axis=-1)
            best = max(best, float(d2.max()))
        return math.sqrt(best)


def polygon_support(vertices: np.ndarray, thetas) -> np.ndarray:
    """max_j <v_j, u(theta)> for each direction, chunked to bound memory."""
    t = np.atleast_1d(np.asarray(thetas, dtype=float))
    out = np.empty(t.shape)
    v = np.asarray(vertices, dtype=float)
    for i in range(0, t.size, 1024):
        blk = t[i : i + 1024]
        u = np.column_stack([np.cos(blk), np.sin(blk)])
        out[i : i + 1024] = (v @ u.T).max(axis=0)
    return out


def _line_intersection(u: np.ndarray, h: np.ndarray, i: int, j: int) -> np.ndarray:
    det = u[i, 0] * u[j, 1] - u[i, 1] * u[j, 0]
    if abs(det) < 1e-15:
        # Parallel support lines; only reachable transiently for consistent
        # antipodal pairs.  Report a far point along edge i's travel direction.
        far = np.array([-u[i, 1], u[i, 0]])
        return u[i] * h[i] + 1e18 * far
    x = (h[i] * u[j, 1] - h[j] * u[i, 1]) / det
    y = (h[j] * u[i, 0] - h[i] * u[j, 0]) / det
    return np.array([x, y])


def polygon_from_support(normals, support) -> Polygon:
    """Build the bounded intersection of supporting half-planes.

    Raises EmptyBodyError / UnboundedError / DegenerateBodyError per the
    standard taxonomy.  Redundant constraints are kept in the normal list but
    flagged inactive with zero edge length.
    """
    theta = canonical_angles(normals)
    h = np.asarray(support, dtype=float).copy()
    if theta.shape != h.shape or theta.ndim != 1:
        raise ValueError("normals and support must be 1-D arrays of equal length")
    order = np.argsort(theta, kind="stable")
    theta, h = theta[order], h[order]
    if theta.size >= 2 and np.min(np.diff(theta)) <= ANGLE_TOL:
        raise ValueError("duplicate normal angles (merge atoms upstream)")
    if theta.size >= 2 and (theta[0] + TWO_PI - theta[-1]) <= ANGLE_TOL:
        raise ValueError("duplicate normal angles across the seam")
    n = theta.size

    # Inconsistent antipodal pairs mean an empty strip regardless of the rest.
    for i in range(n):
        j = int(np.searchsorted(theta, theta[i] + math.pi - 1e-9))
        while j < n and theta[j] <= theta[i] + math.pi + 1e-9:
            if angles_antipodal(theta[i], theta[j], 1e-9) and h[i] + h[j] < -GEOM_TOL:
                raise EmptyBodyError(
                    f"antipodal constraints at angles {theta[i]:.6g}, {theta[j]:.6g} "
                    f"leave no feasible point (h_i + h_j = {h[i] + h[j]:.3g} < 0)"
                )
            j += 1

    if n < 3 or circular_gaps(theta).max() >= math.pi - ANGLE_TOL:
        raise UnboundedError("normals fit in a closed half-circle; body unbounded")

    u = unit_vectors(theta)

    def violates(k: int, x: np.ndarray) -> bool:
        return float(x @ u[k]) > h[k] + GEOM_TOL

    dq: deque[int] = deque()
    for k in range(n):
        while len(dq) >= 2 and violates(k, _line_intersection(u, h, dq[-2], dq[-1])):
            dq.pop()
        while len(dq) >= 2 and violates(k, _line_intersection(u, h, dq[0], dq[1])):
            dq.popleft()
        dq.append(k)
    changed = True
    while changed and len(dq) >= 3:
        changed = False
        if violates(dq[0], _line_intersection(u, h, dq[-2], dq[-1])):
            dq.pop()
            changed = True
        if len(dq) >= 3 and violates(dq[-1], _line_intersection(u, h, dq[0], dq[1])):
            dq.popleft()
            changed = True
    if len(dq) < 3:
        raise EmptyBodyError("half-plane intersection is empty or lower-dimensional")

    idx = list(dq)
    m = len(idx)
    verts = np.array(
        [_line_intersection(u, h, idx[k], idx[(k + 1) % m]) for k in range(m)]
    )

    # Signed area of the vertex chain; also rejects inconsistent chains.
    x, y = verts[:, 0], verts[:, 1]
    area2 = float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if not np.isfinite(area2) or area2 <= 2.0 * GEOM_TOL:
        if area2 < -GEOM_TOL:
            raise EmptyBodyError("half-plane intersection is empty")
        raise DegenerateBodyError(f"intersection area {0.5 * area2:.3g} below tolerance")

    lengths = np.zeros(n)
    edge_ends = np.full((n, 2, 2), np.nan)
    for k, i in enumerate(idx):
        a = verts[k - 1]  # vertex between edges idx[k-1] and idx[k]
        b = verts[k]
        lengths[i] = float(np.hypot(*(b - a)))
        edge_ends[i, 0], edge_ends[i, 1] = a, b
    active = lengths > EDGE_TOL

    # Drop duplicate chain vertices (collapsed edges) from the stored chain.
    keep = [k for k in range(m) if np.hypot(*(verts[k] - verts[k - 1])) > EDGE_TOL]
    chain = verts[keep] if len(keep) >= 3 else verts

    return Polygon(theta, h, chain, active, lengths, edge_ends)


def edge_lengths(P: Polygon) -> np.ndarray:
    """Per-normal boundary edge lengths (0 where the constraint is slack)."""
    return P.lengths.copy()


def area(P: Polygon) -> float:
    """Area = (1/2) sum h_i * edge_i."""
    return 0.5 * float(np.dot(P.support, P.lengths))


def support_distance(P: Polygon, Q: Polygon, grid: int = 4096) -> float:
    """max |h_P - h_Q| over a dense angle grid plus both normal sets."""
    t = np.concatenate(
        [np.linspace(0.0, TWO_PI, grid, endpoint=False), P.normals, Q.normals]
    )
    return float(np.max(np.abs(P.support_values(t) - Q.support_values(t))))


def translate(P: Polygon, xi) -> Polygon:
    """Body re-anchored at xi: returns P - xi, so h'_i = h_i - <xi, u_i>."""
    xi = np.asarray(xi, dtype=float)
    shift = unit_vectors(P.normals) @ xi
    return Polygon(
        P.normals.copy(),
        P.support - shift,
        P.vertices - xi,
        P.active.copy(),
        P.lengths.copy(),
        P.edge_ends - xi,
    )


def dilate(P: Polygon, lam: float) -> Polygon:
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    return Polygon(
        P.normals.copy(),
        P.support * lam,
        P.vertices * lam,
        P.active.copy(),
        P.lengths * lam,
        P.edge_ends * lam,
    )


def apply_isometry(P: Polygon, A: Isometry2) -> Polygon:
    """Image body A(P); normals are re-sorted after the action on angles."""
    theta = A.apply_angles(P.normals)
    order = np.argsort(theta, kind="stable")
    ends = A.apply_points(P.edge_ends.reshape(-1, 2)).reshape(P.edge_ends.shape)
    if A.kind == "reflection":
        ends = ends[:, ::-1, :]  # reflections reverse edge traversal
    verts = A.apply_points(P.vertices)
    if A.kind == "reflection":
        verts = verts[::-1]
    return Polygon(
        theta[order],
        P.support[order],
        verts,
        P.active[order],
        P.lengths[order],
        ends[order],
    )


def in_positive_hull(theta: float, generators) -> bool:
    """Is u(theta) a nonnegative combination of the generator directions?

    In the plane this is angular containment: if the generators positively
    span R^2 (no closed half-plane contains them all) every direction
    qualifies; otherwise the hull is the cone over the minimal enclosing arc.
    """
    gens = np.sort(canonical_angles(generators))
    if gens.size == 0:
        raise ValueError("need at least one generator")
    t = canonical_angle(theta)
    gaps = circular_gaps(gens)
    gmax = float(gaps.max())
    if gmax < math.pi - ANGLE_TOL:
        return True  # cone is the whole plane
    k = int(np.argmax(gaps))
    start = gens[(k + 1) % gens.size]  # arc runs CCW from here, width 2pi - gmax
    width = TWO_PI - gmax
    offset = canonical_angle(t - start)
    return offset <= width + ANGLE_TOL or offset >= TWO_PI - ANGLE_TOL


def group_orbit_map(normals: np.ndarray, A: Isometry2, tol: float = 1e-9) -> np.ndarray:
    """Index permutation sending each normal to its image under A."""
    theta = canonical_angles(normals)
    images = A.apply_angles(theta)
    order = np.argsort(theta, kind="stable")
    sorted_theta = theta[order]
    perm = np.empty(len(theta), dtype=int)
    for i, img in enumerate(images):
        j = int(np.searchsorted(sorted_theta, img))
        best, bestdist = -1, tol
        for cand in (j - 1, j, j % len(theta)):
            c = cand % len(theta)
            d = circular_distance(sorted_theta[c], img)
            if d <= bestdist:
                best, bestdist = c, d
        if best < 0:
            raise NotClosedUnderGroupError(
                f"normal at {theta[i]:.12g} maps to {img:.12g}, not in the set"
            )
        perm[i] = order[best]
    return perm
