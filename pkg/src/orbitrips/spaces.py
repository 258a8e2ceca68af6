"""Finite metric spaces: validation, deterministic generators, serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Any

import numpy as np

__all__ = [
    "TRIANGLE_EPS",
    "FiniteMetricSpace",
    "ShapeSpec",
    "MetricValidation",
    "SpaceValidationError",
    "validate_metric",
    "critical_values",
    "generate_space",
    "space_to_dict",
    "space_from_dict",
    "save_space",
    "load_space",
    "space_from_csv",
    "twelve_circles_action_generators",
]

# Absolute slack for the triangle inequality; distances are float64 and every
# other axiom is checked exactly.
TRIANGLE_EPS = 1e-9

_SHAPE_KINDS = (
    "evenly-spaced-circle",
    "geodesic-sphere",
    "flat-torus-grid",
    "six-circles",
    "twelve-circles",
    "explicit-matrix",
)


class FiniteMetricSpace:
    """A finite metric space given by a dense symmetric float64 matrix.

    The matrix is frozen (read-only) on construction; all derived objects
    (quotients, complexes, filtrations) treat spaces as immutable values.
    """

    def __init__(self, dist, labels=None, provenance=None):
        dist = np.array(dist, dtype=np.float64)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ValueError("distance matrix must be square")
        dist.setflags(write=False)
        self.dist = dist
        self.n = int(dist.shape[0])
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("labels length does not match point count")
        self.provenance = dict(provenance) if provenance else {}

    def __repr__(self):
        kind = self.provenance.get("kind", "explicit")
        return f"FiniteMetricSpace(n={self.n}, kind={kind!r})"


@dataclass
class ShapeSpec:
    """Recipe for a deterministic sample space; `params` are per-kind."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None


@dataclass
class MetricValidation:
    """Result of checking the metric axioms; violations are data, not errors."""

    ok: bool
    n: int
    eps_triangle: float
    violations: list[dict] = field(default_factory=list)
    truncated: bool = False


class SpaceValidationError(ValueError):
    """Raised when a space read from disk fails the metric axioms."""

    def __init__(self, report: MetricValidation):
        self.report = report
        first = report.violations[0] if report.violations else {}
        super().__init__(f"invalid metric: {len(report.violations)} violation(s), first={first}")


def validate_metric(space: FiniteMetricSpace, eps_triangle: float = TRIANGLE_EPS,
                    max_violations: int = 100) -> MetricValidation:
    """Check symmetry, zero diagonal, positivity, and the triangle inequality.

    Symmetry, the diagonal, and positivity are exact comparisons; the triangle
    inequality gets `eps_triangle` of absolute slack.  At most `max_violations`
    offending index tuples are reported (the scan stops once the cap is hit).
    """
    D = space.dist
    n = space.n
    violations: list[dict] = []
    truncated = False

    def _add(kind, indices, value):
        nonlocal truncated
        if len(violations) >= max_violations:
            truncated = True
            return False
        violations.append({"kind": kind, "indices": list(indices), "value": float(value)})
        return True

    diag = np.flatnonzero(np.diag(D) != 0.0)
    for i in diag:
        if not _add("diagonal", (int(i),), D[i, i]):
            break

    if not truncated:
        asym = np.argwhere(D != D.T)
        for i, j in asym:
            if i < j and not _add("symmetry", (int(i), int(j)), D[i, j] - D[j, i]):
                break

    if not truncated:
        off = ~np.eye(n, dtype=bool)
        bad = np.argwhere((D <= 0.0) & off)
        for i, j in bad:
            if i < j and not _add("positivity", (int(i), int(j)), D[i, j]):
                break

    if not truncated:
        # d(i,k) <= d(i,j) + d(j,k) + eps, scanned one middle point at a time
        for j in range(n):
            slack = D[:, j][:, None] + D[j, :][None, :] + eps_triangle
            bad = np.argwhere(D > slack)
            for i, k in bad:
                if not _add("triangle", (int(i), int(j), int(k)), D[i, k] - slack[i, k] + eps_triangle):
                    break
            if truncated:
                break

    return MetricValidation(ok=not violations, n=n, eps_triangle=eps_triangle,
                            violations=violations, truncated=truncated)


def critical_values(space: FiniteMetricSpace) -> np.ndarray:
    """Sorted distinct positive pairwise distances (the scales where anything changes)."""
    vals = space.dist[np.triu_indices(space.n, k=1)]
    vals = vals[vals > 0.0]
    return np.unique(vals)


# ---------------------------------------------------------------------------
# generators


def _euclidean_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    D = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(D, 0.0)
    return D


def _require_distinct(D: np.ndarray, kind: str) -> None:
    off = D[np.triu_indices(D.shape[0], k=1)]
    if off.size and off.min() <= 0.0:
        raise ValueError(f"{kind}: generated coincident points")


def _circle_space(n: int, circumference: float) -> np.ndarray:
    k = np.arange(n)
    fwd = (k[None, :] - k[:, None]) % n
    arc = np.minimum(fwd, n - fwd)
    np.fill_diagonal(arc, 0)
    # multiply before dividing so integer-valued numerators stay exact
    return (arc * float(circumference)) / n


def _sphere_space(dim: int, count: int, paired: bool, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(count, dim + 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    if paired:
        pts = np.vstack([pts, -pts])
    dots = np.clip(pts @ pts.T, -1.0, 1.0)
    D = np.arccos(dots) / (2.0 * math.pi)  # great circles have circumference 1
    np.fill_diagonal(D, 0.0)
    return D


def _torus_grid_space(k: int) -> np.ndarray:
    steps = np.arange(k)
    fwd = (steps[None, :] - steps[:, None]) % k
    arc = np.minimum(fwd, k - fwd) * (2.0 * math.pi / k)
    idx = np.arange(k * k)
    ix, iy = idx // k, idx % k
    D = np.hypot(arc[ix[:, None], ix[None, :]], arc[iy[:, None], iy[None, :]])
    np.fill_diagonal(D, 0.0)
    return D


def _six_circles_points(m: int) -> np.ndarray:
    # six unit circles whose centers sit on a radius-4 hexagon; the sample is
    # invariant under rotation by 60 degrees (block t of circle j+1 is the
    # rotated image of block t of circle j)
    pts = np.empty((6 * m, 2))
    for j in range(6):
        base = j * math.pi / 3.0
        t = np.arange(m)
        ang = base + 2.0 * math.pi * t / m
        pts[j * m:(j + 1) * m, 0] = 4.0 * math.cos(base) + np.cos(ang)
        pts[j * m:(j + 1) * m, 1] = 4.0 * math.sin(base) + np.sin(ang)
    return pts


_TETRA_VERTS = np.array([
    [0.5, 0.0, -math.sqrt(2.0) / 4.0],
    [-0.5, 0.0, -math.sqrt(2.0) / 4.0],
    [0.0, 0.5, math.sqrt(2.0) / 4.0],
    [0.0, -0.5, math.sqrt(2.0) / 4.0],
])


def _perm_parity(perm) -> int:
    inv = sum(1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b])
    return inv % 2


def _a4_rotations() -> list[tuple[tuple[int, ...], np.ndarray]]:
    """The 12 rotations of the regular tetrahedron, keyed by even vertex permutations."""
    base = _TETRA_VERTS[:3].T
    inv = np.linalg.inv(base)
    out = []
    for perm in permutations(range(4)):
        if _perm_parity(perm):
            continue
        R = _TETRA_VERTS[list(perm[:3])].T @ inv
        assert abs(np.linalg.det(R) - 1.0) < 1e-9
        assert np.abs(R @ R.T - np.eye(3)).max() < 1e-9
        assert np.abs(R @ _TETRA_VERTS[3] - _TETRA_VERTS[perm[3]]).max() < 1e-9
        out.append((perm, R))
    out.sort(key=lambda pr: pr[0])  # identity first, then lexicographic
    return out


def _twelve_circles_points(m: int) -> np.ndarray:
    center = np.array([5.0 / 8.0, 3.0 / 8.0, -math.sqrt(2.0) / 8.0])
    u = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)  # spans the plane with normal (1,1,0)
    w = np.array([0.0, 0.0, -1.0])
    phi = 2.0 * math.pi * np.arange(m) / m
    ring = center + 0.2 * (np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * w)
    blocks = [ring @ R.T for _, R in _a4_rotations()]
    return np.vstack(blocks)


def twelve_circles_action_generators(m: int) -> list[list[int]]:
    """Index permutations generating the order-12 rotation action on twelve-circles(m)."""
    rots = _a4_rotations()
    index_of = {perm: i for i, (perm, _) in enumerate(rots)}
    gens = []
    for gen in ((1, 2, 0, 3), (1, 0, 3, 2)):  # a 3-cycle and a double transposition
        perm = [0] * (12 * m)
        for gi, (g, _) in enumerate(rots):
            hg = tuple(gen[g[i]] for i in range(4))
            for t in range(m):
                perm[gi * m + t] = index_of[hg] * m + t
        gens.append(perm)
    return gens


def generate_space(spec: ShapeSpec) -> FiniteMetricSpace:
    """Build one of the deterministic sample spaces.

    Kinds
    -----
    evenly-spaced-circle : params n (>=3), circumference (default 1.0)
    geodesic-sphere      : params dim, count (>=3), paired (bool); geodesic
                           metric normalized so great circles have circumference 1
    flat-torus-grid      : params k (>=3); k x k grid on [0, 2*pi)^2
    six-circles          : params m (>=3 points per circle)
    twelve-circles       : params m (>=3 points per circle)
    explicit-matrix      : params n, matrix (lower-triangular row-major)

    Identical specs (seed included) reproduce bit-identical matrices.
    """
    kind = spec.kind
    p = dict(spec.params)
    if kind not in _SHAPE_KINDS:
        raise ValueError(f"unknown shape kind {kind!r}")

    if kind == "evenly-spaced-circle":
        n = int(p.get("n", 0))
        circumference = float(p.get("circumference", 1.0))
        if n < 3:
            raise ValueError("evenly-spaced-circle: need n >= 3")
        if circumference <= 0:
            raise ValueError("evenly-spaced-circle: circumference must be positive")
        D = _circle_space(n, circumference)
    elif kind == "geodesic-sphere":
        dim = int(p.get("dim", 2))
        count = int(p.get("count", 0))
        paired = bool(p.get("paired", False))
        if dim < 1:
            raise ValueError("geodesic-sphere: need dim >= 1")
        if count < 3:
            raise ValueError("geodesic-sphere: need count >= 3")
        seed = 0 if spec.seed is None else int(spec.seed)
        D = _sphere_space(dim, count, paired, seed)
    elif kind == "flat-torus-grid":
        k = int(p.get("k", 0))
        if k < 3:
            raise ValueError("flat-torus-grid: need k >= 3")
        D = _torus_grid_space(k)
    elif kind == "six-circles":
        m = int(p.get("m", 0))
        if m < 3:
            raise ValueError("six-circles: need m >= 3")
        D = _euclidean_matrix(_six_circles_points(m))
    elif kind == "twelve-circles":
        m = int(p.get("m", 0))
        if m < 3:
            raise ValueError("twelve-circles: need m >= 3")
        D = _euclidean_matrix(_twelve_circles_points(m))
    else:  # explicit-matrix
        n = int(p.get("n", 0))
        matrix = p.get("matrix")
        if n < 1 or matrix is None:
            raise ValueError("explicit-matrix: need n and matrix")
        D = _unpack_lower_triangular(n, matrix)

    _require_distinct(D, kind)
    provenance = {"kind": kind, "params": p, "seed": spec.seed}
    return FiniteMetricSpace(D, provenance=provenance)


# ---------------------------------------------------------------------------
# serialization


def _pack_lower_triangular(D: np.ndarray) -> list[float]:
    n = D.shape[0]
    return [float(D[i, j]) for i in range(1, n) for j in range(i)]


def _unpack_lower_triangular(n: int, flat) -> np.ndarray:
    flat = list(flat)
    if len(flat) != n * (n - 1) // 2:
        raise ValueError(f"expected {n * (n - 1) // 2} entries for n={n}, got {len(flat)}")
    D = np.zeros((n, n))
    pos = 0
    for i in range(1, n):
        for j in range(i):
            D[i, j] = D[j, i] = float(flat[pos])
            pos += 1
    return D


def space_to_dict(space: FiniteMetricSpace) -> dict:
    out = {"n": space.n, "matrix": _pack_lower_triangular(space.dist)}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    out["provenance"] = space.provenance
    return out


def space_from_dict(data: dict, validate: bool = True) -> FiniteMetricSpace:
    n = int(data["n"])
    D = _unpack_lower_triangular(n, data["matrix"])
    space = FiniteMetricSpace(D, labels=data.get("labels"), provenance=data.get("provenance"))
    if validate:
        report = validate_metric(space)
        if not report.ok:
            raise SpaceValidationError(report)
    return space


def save_space(space: FiniteMetricSpace, path, extra: dict | None = None) -> None:
    doc = space_to_dict(space)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_space(path, validate: bool = True) -> FiniteMetricSpace:
    with open(path) as fh:
        return space_from_dict(json.load(fh), validate=validate)


def space_from_csv(path, validate: bool = True) -> FiniteMetricSpace:
    """Read a lower-triangular CSV: line i holds the i distances d(i,0..i-1)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(tok) for tok in line.split(",")])
    n = len(rows) + 1
    for i, row in enumerate(rows, start=1):
        if len(row) != i:
            raise ValueError(f"csv row {i} should hold {i} entries, got {len(row)}")
    flat = [v for row in rows for v in row]
    space = FiniteMetricSpace(_unpack_lower_triangular(n, flat),
                              provenance={"kind": "explicit-matrix", "source": "csv"})
    if validate:
        report = validate_metric(space)
        if not report.ok:
            raise SpaceValidationError(report)
    return space
