"""Finite isometric group actions and the quotient metric they induce."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .spaces import FiniteMetricSpace, MetricValidation, validate_metric

__all__ = [
    "ISOMETRY_EPS",
    "GROUP_CAP",
    "IsometricAction",
    "IsometryReport",
    "QuotientSpace",
    "GroupClosureError",
    "close_group",
    "verify_isometric",
    "orbit_of",
    "build_quotient",
    "action_to_dict",
    "action_from_dict",
    "save_action",
    "load_action",
    "circle_rotation_generator",
    "antipodal_generator",
    "paired_swap_generator",
    "block_shift_generator",
    "torus_grid_shift_generators",
]

ISOMETRY_EPS = 1e-9
GROUP_CAP = 10000


class GroupClosureError(RuntimeError):
    """Raised when the generated group exceeds the element cap."""


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # (p o q)(i) = p[q[i]]: apply q first
    return tuple(p[i] for i in q)


class IsometricAction:
    """A finite permutation group acting on the points of a space.

    `elements[0]` is the identity; the element order is deterministic
    (breadth-first by word length in the generators, lexicographic within a
    level), so every derived artifact is reproducible.
    """

    def __init__(self, n: int, elements: list[tuple[int, ...]],
                 generator_indices: list[int]):
        self.n = n
        self.elements = elements
        self.generator_indices = generator_indices
        self._index = {p: i for i, p in enumerate(elements)}
        self.element_arrays = np.array(elements, dtype=np.intp)

    def __len__(self):
        return len(self.elements)

    def index_of(self, perm: tuple[int, ...]) -> int:
        return self._index[perm]

    def multiply(self, i: int, j: int) -> int:
        """Index of elements[i] o elements[j] (apply j, then i)."""
        return self._index[_compose(self.elements[i], self.elements[j])]

    def inverse(self, i: int) -> int:
        p = self.elements[i]
        inv = [0] * self.n
        for a, b in enumerate(p):
            inv[b] = a
        return self._index[tuple(inv)]


def _check_permutation(n: int, perm) -> tuple[int, ...]:
    p = tuple(int(v) for v in perm)
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValueError("generator is not a permutation of range(n)")
    return p


def close_group(n: int, generators, cap: int = GROUP_CAP) -> IsometricAction:
    """Close a generator list under composition.

    Breadth-first by word length, lexicographic within a level, identity at
    index 0.  Finite sets of permutations closed under composition are groups,
    so no explicit inverses are needed.  Raises GroupClosureError past `cap`.
    """
    gens = [_check_permutation(n, g) for g in generators]
    identity = tuple(range(n))
    seen = {identity}
    elements = [identity]
    frontier = [identity]
    while frontier:
        level = set()
        for cur in frontier:
            for g in gens:
                nxt = _compose(cur, g)
                if nxt not in seen:
                    level.add(nxt)
        frontier = sorted(level)
        for p in frontier:
            seen.add(p)
            elements.append(p)
            if len(elements) > cap:
                raise GroupClosureError(f"group closure exceeded cap of {cap} elements")
    gen_idx = []
    index = {p: i for i, p in enumerate(elements)}
    for g in gens:
        gen_idx.append(index[g])
    return IsometricAction(n, elements, gen_idx)


@dataclass
class IsometryReport:
    ok: bool
    max_deviation: float
    eps: float
    counterexample: dict | None = None  # {"g": ..., "x": ..., "y": ..., "deviation": ...}


def verify_isometric(space: FiniteMetricSpace, action: IsometricAction,
                     eps: float = ISOMETRY_EPS) -> IsometryReport:
    """Check |d(gx, gy) - d(x, y)| <= eps for every element, reporting the worst pair."""
    if action.n != space.n:
        raise ValueError("action and space sizes differ")
    D = space.dist
    worst = 0.0
    worst_at = None
    for gi, perm in enumerate(action.element_arrays):
        dev = np.abs(D[np.ix_(perm, perm)] - D)
        k = int(np.argmax(dev))
        x, y = divmod(k, space.n)
        if dev[x, y] > worst:
            worst = float(dev[x, y])
            worst_at = {"g": gi, "x": int(x), "y": int(y), "deviation": worst}
    ok = worst <= eps
    return IsometryReport(ok=ok, max_deviation=worst, eps=eps,
                          counterexample=None if ok else worst_at)


def orbit_of(action: IsometricAction, i: int) -> list[int]:
    """Sorted orbit of point i (the group is closed, so element images suffice)."""
    return sorted({int(p[i]) for p in action.elements})


class QuotientSpace:
    """The metric quotient of a space by an isometric action.

    qdist[a][b] = min d(x, y) over x in orbit a, y in orbit b, which realizes
    inf_g d(rep_a, g . rep_b); block minima keep the matrix exactly symmetric
    and every entry is an existing base distance (no new arithmetic).
    """

    def __init__(self, base: FiniteMetricSpace, action: IsometricAction,
                 reps: list[int], proj: np.ndarray, qdist: np.ndarray,
                 validation: MetricValidation):
        self.base = base
        self.action = action
        self.reps = reps
        self.proj = proj
        self.space = FiniteMetricSpace(
            qdist,
            labels=None,
            provenance={"kind": "quotient",
                        "base": base.provenance.get("kind", "explicit"),
                        "group_order": len(action),
                        "orbits": len(reps)},
        )
        self.validation = validation
        # members[a] is ascending, and members[a][0] == reps[a] because
        # representatives are chosen by an ascending scan
        self.members: list[list[int]] = [
            [int(i) for i in np.flatnonzero(proj == a)] for a in range(len(reps))
        ]

    @property
    def n_orbits(self) -> int:
        return len(self.reps)

    def orbit_members(self, a: int) -> np.ndarray:
        return np.flatnonzero(self.proj == a)


def build_quotient(space: FiniteMetricSpace, action: IsometricAction) -> QuotientSpace:
    """Build the quotient space; refuses actions that are not isometric.

    The infimum in the quotient metric is a minimum here: each qdist entry is
    realized by an actual pair of sample points.  A validation report for the
    quotient matrix is attached (non-fatal; callers may refuse bad reports).
    """
    iso = verify_isometric(space, action)
    if not iso.ok:
        raise ValueError(f"action is not isometric within {iso.eps}: {iso.counterexample}")
    n = space.n
    proj = np.full(n, -1, dtype=np.intp)
    reps: list[int] = []
    for i in range(n):
        if proj[i] >= 0:
            continue
        a = len(reps)
        reps.append(i)
        for p in action.elements:
            proj[p[i]] = a
    q = len(reps)
    D = space.dist
    # row-stage then column-stage block minima: exact entries, exact symmetry
    member_lists = [np.flatnonzero(proj == a) for a in range(q)]
    rowmin = np.empty((q, n))
    for a in range(q):
        rowmin[a] = D[member_lists[a]].min(axis=0)
    qdist = np.empty((q, q))
    for b in range(q):
        qdist[:, b] = rowmin[:, member_lists[b]].min(axis=1)
    np.fill_diagonal(qdist, 0.0)
    quotient = QuotientSpace(space, action, reps, proj, qdist,
                             validation=MetricValidation(True, q, 0.0))
    quotient.validation = validate_metric(quotient.space)
    return quotient


# ---------------------------------------------------------------------------
# serialization and canonical generators for the built-in shapes


def action_to_dict(action: IsometricAction) -> dict:
    return {"n": action.n,
            "generators": [list(action.elements[i]) for i in action.generator_indices]}


def action_from_dict(data: dict, cap: int = GROUP_CAP) -> IsometricAction:
    if "n" not in data or "generators" not in data:
        raise ValueError("action document needs 'n' and 'generators'")
    return close_group(int(data["n"]), data["generators"], cap=cap)


def save_action(action: IsometricAction, path) -> None:
    with open(path, "w") as fh:
        json.dump(action_to_dict(action), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_action(path, cap: int = GROUP_CAP) -> IsometricAction:
    with open(path) as fh:
        return action_from_dict(json.load(fh), cap=cap)


def circle_rotation_generator(n: int, steps: int) -> list[int]:
    """Rotation of an n-point circle by `steps` grid steps."""
    return [(i + steps) % n for i in range(n)]


def antipodal_generator(n: int) -> list[int]:
    """The antipodal involution i -> i + n/2 on an even circle sample."""
    if n % 2:
        raise ValueError("antipodal involution needs an even point count")
    return circle_rotation_generator(n, n // 2)


def paired_swap_generator(m: int) -> list[int]:
    """The involution swapping x_i and -x_i in an antipodal-paired sample (offset m)."""
    return [(i + m) % (2 * m) for i in range(2 * m)]


def block_shift_generator(n_blocks: int, block: int) -> list[int]:
    """Cyclic shift of `n_blocks` equal blocks of size `block` (six-circles rotation)."""
    n = n_blocks * block
    return [(i + block) % n for i in range(n)]


def torus_grid_shift_generators(k: int) -> list[list[int]]:
    """Generators for the order-14 torus action: y-shift by 2*pi/7, x-shift by pi.

    Needs 14 | k so both shifts land on grid points.
    """
    if k % 14:
        raise ValueError("torus shifts need the grid size divisible by 14")
    idx = np.arange(k * k)
    ix, iy = idx // k, idx % k
    y_shift = (ix * k + (iy + k // 7) % k).tolist()
    x_shift = (((ix + k // 2) % k) * k + iy).tolist()
    return [y_shift, x_shift]
