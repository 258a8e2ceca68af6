"""Vietoris-Rips and Cech complexes of finite metric spaces, plus the full
VR filtration.  Simplices are enumerated by ordered clique expansion over
bitmask adjacency, so output order is deterministic (dimension, then lex)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spaces import FiniteMetricSpace

__all__ = [
    "DEFAULT_BUDGET",
    "DEFAULT_DIM_CAP",
    "BudgetExceededError",
    "NeighborhoodGraph",
    "SimplicialComplex",
    "VRFiltration",
    "neighborhood_graph",
    "vr_complex",
    "cech_complex",
    "vr_filtration",
]

DEFAULT_BUDGET = 10_000_000
DEFAULT_DIM_CAP = 3

_CONVENTIONS = ("leq", "lt")


class BudgetExceededError(RuntimeError):
    """Raised when simplex enumeration would exceed the configured budget."""

    def __init__(self, budget: int, dim_reached: int):
        self.budget = budget
        self.dim_reached = dim_reached
        super().__init__(f"simplex budget {budget} exceeded at dimension {dim_reached}")


def _check_convention(convention: str) -> str:
    if convention not in _CONVENTIONS:
        raise ValueError(f"convention must be one of {_CONVENTIONS}, got {convention!r}")
    return convention


@dataclass
class NeighborhoodGraph:
    n: int
    r: float
    convention: str
    adj: np.ndarray  # boolean, symmetric, hollow


def neighborhood_graph(space: FiniteMetricSpace, r: float,
                       convention: str = "leq") -> NeighborhoodGraph:
    """Edges between distinct points with d <= r (leq) or d < r (lt)."""
    _check_convention(convention)
    D = space.dist
    adj = (D <= r) if convention == "leq" else (D < r)
    np.fill_diagonal(adj, False)
    adj.setflags(write=False)
    return NeighborhoodGraph(space.n, float(r), convention, adj)


class SimplicialComplex:
    """A fixed-scale complex: dict of dimension -> lex-sorted vertex tuples."""

    def __init__(self, n: int, kind: str, convention: str, r: float,
                 dim_cap: int, simplices: dict[int, list[tuple[int, ...]]]):
        self.n = n
        self.kind = kind
        self.convention = convention
        self.r = r
        self.dim_cap = dim_cap
        self.simplices = simplices
        self._sets: dict[int, set] = {}

    @property
    def counts(self) -> dict[int, int]:
        return {d: len(s) for d, s in self.simplices.items()}

    @property
    def total(self) -> int:
        return sum(len(s) for s in self.simplices.values())

    def contains(self, simplex: tuple[int, ...]) -> bool:
        d = len(simplex) - 1
        if d not in self._sets:
            self._sets[d] = set(self.simplices.get(d, ()))
        return tuple(simplex) in self._sets[d]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "convention": self.convention,
            "r": self.r,
            "dim_cap": self.dim_cap,
            "n": self.n,
            "counts": {str(d): len(s) for d, s in self.simplices.items()},
            "simplices": {str(d): [list(s) for s in simps]
                          for d, simps in self.simplices.items()},
        }

    def __repr__(self):
        return (f"SimplicialComplex(kind={self.kind!r}, r={self.r}, "
                f"convention={self.convention!r}, counts={self.counts})")


def _masks_from_adj(adj: np.ndarray) -> list[int]:
    """Row bitmasks of a boolean matrix (bit j of mask i <=> adj[i, j])."""
    n = adj.shape[0]
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(packed[i].tobytes(), "little") for i in range(n)]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _expand_cliques(n: int, adj_masks: list[int], dim_cap: int, budget: int,
                    child_state=None, root_state=None):
    """Ordered clique expansion over bitmask adjacency.

    Yields nothing; fills and returns {dim: [simplex tuples]}.  Optional
    `root_state(v)` / `child_state(state, simplex, v)` thread extra per-simplex
    data (Cech witness masks, filtration values); child_state may return None
    to prune the child.
    """
    simplices: dict[int, list[tuple[int, ...]]] = {0: [(i,) for i in range(n)]}
    count = n
    if count > budget:
        raise BudgetExceededError(budget, 0)
    states = None if root_state is None else [root_state(i) for i in range(n)]
    # candidates start as neighbors above the vertex
    frontier = []
    for i in range(n):
        above = -1 << (i + 1)
        frontier.append(((i,), adj_masks[i] & above,
                         None if states is None else states[i]))
    for dim in range(1, dim_cap + 1):
        nxt = []
        out = []
        for simplex, cand, state in frontier:
            m = cand
            while m:
                low = m & -m
                v = low.bit_length() - 1
                m ^= low
                if child_state is not None:
                    cstate = child_state(state, simplex, v)
                    if cstate is None:
                        continue
                else:
                    cstate = None
                child = simplex + (v,)
                count += 1
                if count > budget:
                    raise BudgetExceededError(budget, dim)
                out.append(child)
                if dim < dim_cap:
                    nxt.append((child, cand & adj_masks[v] & (-1 << (v + 1)), cstate))
        if not out:
            break
        simplices[dim] = out
        frontier = nxt
    return simplices


def vr_complex(space: FiniteMetricSpace, r: float, convention: str = "leq",
               dim_cap: int = DEFAULT_DIM_CAP, budget: int = DEFAULT_BUDGET) -> SimplicialComplex:
    """Vietoris-Rips complex at scale r: the flag complex of the neighborhood graph.

    Parameters
    ----------
    space : FiniteMetricSpace
    r : float
        Scale.
    convention : {"leq", "lt"}
        Whether edges require d <= r or d < r.
    dim_cap : int
        Highest simplex dimension enumerated.
    budget : int
        Total simplex cap; overflow raises BudgetExceededError.
    """
    _check_convention(convention)
    graph = neighborhood_graph(space, r, convention)
    masks = _masks_from_adj(graph.adj)
    simplices = _expand_cliques(space.n, masks, dim_cap, budget)
    return SimplicialComplex(space.n, "vr", convention, float(r), dim_cap, simplices)


def cech_complex(space: FiniteMetricSpace, r: float, convention: str = "leq",
                 dim_cap: int = DEFAULT_DIM_CAP, budget: int = DEFAULT_BUDGET) -> SimplicialComplex:
    """Cech complex with sample-point witnesses.

    A simplex enters iff some sample point y lies within r of every member
    (strictly for "lt"), i.e. the balls around the members share a witness in
    the sample itself.  Vertices are always present.  Candidate cliques are
    pruned by the pairwise-witness graph, a refinement of the VR graph at 2r.
    """
    _check_convention(convention)
    D = space.dist
    balls = (D <= r) if convention == "leq" else (D < r)
    ball_masks = _masks_from_adj(balls)  # bit y of mask i: y witnesses i's ball
    # diagonal: a point witnesses its own ball when d(x,x)=0 satisfies the comparison
    if convention == "leq" or r > 0:
        for i in range(space.n):
            ball_masks[i] |= 1 << i
    pair_adj = [0] * space.n
    for i in range(space.n):
        mi = ball_masks[i]
        for j in range(i + 1, space.n):
            if mi & ball_masks[j]:
                pair_adj[i] |= 1 << j
                pair_adj[j] |= 1 << i

    def root_state(i):
        return ball_masks[i]

    def child_state(state, simplex, v):
        w = state & ball_masks[v]
        return w if w else None

    simplices = _expand_cliques(space.n, pair_adj, dim_cap, budget,
                                child_state=child_state, root_state=root_state)
    return SimplicialComplex(space.n, "cech", convention, float(r), dim_cap, simplices)


class VRFiltration:
    """All simplices up to dim_cap with their VR appearance values.

    Entries are sorted by (value, dimension, lexicographic vertices), which is
    a valid filtration order: faces never come after cofaces.
    """

    def __init__(self, n: int, dim_cap: int, entries: list[tuple[float, tuple[int, ...]]]):
        self.n = n
        self.dim_cap = dim_cap
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def max_value(self) -> float:
        return max((v for v, _ in self.entries), default=0.0)

    def truncate(self, r: float, convention: str = "leq") -> "VRFiltration":
        """Sub-filtration of simplices present at scale r under the convention."""
        _check_convention(convention)
        if convention == "leq":
            kept = [e for e in self.entries if e[0] <= r]
        else:
            kept = [e for e in self.entries if e[0] < r]
        return VRFiltration(self.n, self.dim_cap, kept)


def vr_filtration(space: FiniteMetricSpace, dim_cap: int = DEFAULT_DIM_CAP,
                  budget: int = DEFAULT_BUDGET) -> VRFiltration:
    """Full VR filtration: every subset of <= dim_cap+1 points, valued at its diameter."""
    n = space.n
    total = sum(math.comb(n, k + 1) for k in range(min(dim_cap, n - 1) + 1))
    if total > budget:
        raise BudgetExceededError(budget, dim_cap)
    Dl = space.dist.tolist()
    all_mask = (1 << n) - 1
    adj = [(all_mask ^ (1 << i)) for i in range(n)]

    values: list[tuple[float, tuple[int, ...]]] = []

    def root_state(i):
        return 0.0

    def child_state(value, simplex, v):
        row = Dl[v]
        m = value
        for u in simplex:
            duv = row[u]
            if duv > m:
                m = duv
        return m

    # reuse the expansion walk but record values alongside
    simplices: dict[int, list] = {0: [(i,) for i in range(n)]}
    for i in range(n):
        values.append((0.0, (i,)))
    frontier = [((i,), adj[i] & (-1 << (i + 1)), 0.0) for i in range(n)]
    for dim in range(1, dim_cap + 1):
        nxt = []
        any_child = False
        for simplex, cand, val in frontier:
            m = cand
            while m:
                low = m & -m
                v = low.bit_length() - 1
                m ^= low
                cval = child_state(val, simplex, v)
                child = simplex + (v,)
                values.append((cval, child))
                any_child = True
                if dim < dim_cap:
                    nxt.append((child, cand & adj[v] & (-1 << (v + 1)), cval))
        if not any_child:
            break
        frontier = nxt
    values.sort(key=lambda e: (e[0], len(e[1]), e[1]))
    return VRFiltration(n, dim_cap, values)
