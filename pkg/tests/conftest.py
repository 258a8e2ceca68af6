"""Shared fixtures and brute-force oracles.

The oracles here recompute everything straight from definitions with
itertools-style enumeration and no shared code with the library internals
(no bitmasks, no clique expansion, no anchoring, no branch-and-bound), so
agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from orbitrips.actions import IsometricAction, close_group
from orbitrips.spaces import FiniteMetricSpace

EQ_EPS = 1e-9


# ---------------------------------------------------------------------------
# brute-force complexes


def _cmp(value: float, r: float, convention: str) -> bool:
    return value < r if convention == "lt" else value <= r


def brute_vr(D: np.ndarray, r: float, convention: str, dim_cap: int) -> dict[int, list[tuple]]:
    n = D.shape[0]
    out: dict[int, list[tuple]] = {}
    for size in range(1, dim_cap + 2):
        simps = []
        for verts in itertools.combinations(range(n), size):
            if all(_cmp(D[a, b], r, convention)
                   for a, b in itertools.combinations(verts, 2)):
                simps.append(verts)
        out[size - 1] = simps
    return out


def brute_cech(D: np.ndarray, r: float, convention: str, dim_cap: int) -> dict[int, list[tuple]]:
    n = D.shape[0]
    out: dict[int, list[tuple]] = {}
    for size in range(1, dim_cap + 2):
        simps = []
        for verts in itertools.combinations(range(n), size):
            if any(all(_cmp(D[v, w], r, convention) for v in verts)
                   for w in range(n)):
                simps.append(verts)
        out[size - 1] = simps
    return out


# ---------------------------------------------------------------------------
# brute-force action property checks (definition-level, no anchoring)


def brute_distance_ok(D: np.ndarray, action: IsometricAction, r: float) -> bool:
    return all(D[x, p[x]] >= r
               for p in action.elements[1:] for x in range(D.shape[0]))


def brute_ball_ok(D: np.ndarray, action: IsometricAction, r: float) -> bool:
    n = D.shape[0]
    for p in action.elements[1:]:
        for x in range(n):
            for y in range(n):
                if max(D[x, y], D[p[x], y]) < r:
                    return False
    return True


def _orbit_subsets(proj: np.ndarray, k_max: int):
    n_orbits = int(proj.max()) + 1
    for size in range(2, k_max + 2):
        yield from itertools.combinations(range(n_orbits), size)


def _tuple_classes(tuples: list[tuple], action: IsometricAction) -> int:
    """Number of action-orbits among point tuples (as sets of sorted images)."""
    remaining = set(tuples)
    classes = 0
    while remaining:
        t = remaining.pop()
        classes += 1
        for p in action.elements:
            img = tuple(sorted(p[v] for v in t))
            remaining.discard(img)
    return classes


def brute_diameter_ok(space: FiniteMetricSpace, action: IsometricAction,
                      r: float, k_max: int) -> bool:
    """Definition-level diameter property: doubles part + per-subset unique
    in-scale lift class achieving the quotient diameter."""
    D = space.dist
    n = space.n
    for p in action.elements[1:]:
        for x in range(n):
            if D[x, p[x]] < r:
                return False
    proj = _brute_proj(action)
    members = [sorted(np.flatnonzero(proj == a)) for a in range(proj.max() + 1)]
    qdist = _brute_qdist(D, members)
    for orbits in _orbit_subsets(proj, k_max):
        qdiam = max(qdist[a][b] for a, b in itertools.combinations(orbits, 2))
        if not qdiam < r:
            continue
        all_tuples = []
        diams = []
        for tup in itertools.product(*[members[a] for a in orbits]):
            diam = max(D[a, b] for a, b in itertools.combinations(tup, 2))
            all_tuples.append((diam, tuple(sorted(tup))))
            diams.append(diam)
        within = [t for d, t in all_tuples if d < r]
        if not within:
            return False
        if _tuple_classes(within, action) != 1:
            return False
        if min(diams) > qdiam + EQ_EPS:
            return False
        # the in-scale class must be the achieving one
        if min(d for d, t in all_tuples if t in set(within)) > qdiam + EQ_EPS:
            return False
    return True


def brute_nerve_ok(space: FiniteMetricSpace, action: IsometricAction,
                   r: float, k_max: int, convention: str = "lt") -> bool:
    D = space.dist
    n = space.n
    for p in action.elements[1:]:
        for x in range(n):
            for y in range(n):
                if _cmp(D[x, y], r, convention) and _cmp(D[p[x], y], r, convention):
                    return False
    proj = _brute_proj(action)
    members = [sorted(np.flatnonzero(proj == a)) for a in range(proj.max() + 1)]
    qdist = _brute_qdist(D, members)
    n_orbits = len(members)
    for orbits in _orbit_subsets(proj, k_max):
        if not any(all(_cmp(qdist[a][w], r, convention) for a in orbits)
                   for w in range(n_orbits)):
            continue
        witnessed = []
        for tup in itertools.product(*[members[a] for a in orbits]):
            if any(all(_cmp(D[v, w], r, convention) for v in tup) for w in range(n)):
                witnessed.append(tuple(sorted(tup)))
        if not witnessed:
            return False
        if _tuple_classes(witnessed, action) != 1:
            return False
    return True


def _brute_proj(action: IsometricAction) -> np.ndarray:
    n = action.n
    proj = np.full(n, -1, dtype=int)
    nxt = 0
    for i in range(n):
        if proj[i] >= 0:
            continue
        for p in action.elements:
            proj[p[i]] = nxt
        nxt += 1
    return proj


def _brute_qdist(D: np.ndarray, members: list[list[int]]) -> list[list[float]]:
    q = len(members)
    out = [[0.0] * q for _ in range(q)]
    for a in range(q):
        for b in range(q):
            if a != b:
                out[a][b] = min(D[x, y] for x in members[a] for y in members[b])
    return out


# ---------------------------------------------------------------------------
# random space / action generators


def random_cloud_space(rng: np.random.Generator, n: int, dim: int = 3,
                       min_sep: float = 1e-3) -> FiniteMetricSpace:
    """Random Euclidean cloud; resamples until points are min_sep apart."""
    while True:
        pts = rng.uniform(-1.0, 1.0, size=(n, dim))
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.sqrt((diff ** 2).sum(axis=2))
        np.fill_diagonal(D, 0.0)
        off = D[~np.eye(n, dtype=bool)]
        if off.min() > min_sep:
            return FiniteMetricSpace(D, provenance={"kind": "random-cloud"})


def random_rotated_cloud(rng: np.random.Generator, m: int, k: int,
                         radius_lo: float = 0.5):
    """Base space = k copies of a random planar cloud rotated by 2*pi/k, with
    the cyclic shift action; distances are snapped over orbit pairs so the
    action is exactly isometric in floats.

    Returns (space, action).  Points stay at radius >= radius_lo from the
    center so the rotation is free.
    """
    while True:
        ang = rng.uniform(0, 2 * math.pi, size=m)
        rad = rng.uniform(radius_lo, 1.5, size=m)
        base = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
        pts = np.empty((k * m, 2))
        for j in range(k):
            t = 2 * math.pi * j / k
            R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
            pts[j * m:(j + 1) * m] = base @ R.T
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.sqrt((diff ** 2).sum(axis=2))
        np.fill_diagonal(D, 0.0)
        n = k * m
        gen = [((i // m + 1) % k) * m + i % m for i in range(n)]
        action = close_group(n, [gen])
        # snap each orbit of index pairs to the value at its lex-least member
        snapped = D.copy()
        seen = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i, j]:
                    continue
                pairs = {(min(p[i], p[j]), max(p[i], p[j])) for p in action.elements}
                val = D[min(pairs)]
                for a, b in pairs:
                    snapped[a, b] = snapped[b, a] = val
                    seen[a, b] = True
        off = snapped[~np.eye(n, dtype=bool)]
        if off.min() <= 1e-3:
            continue
        space = FiniteMetricSpace(snapped, provenance={"kind": "rotated-cloud",
                                                       "m": m, "k": k})
        return space, action


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260816)
