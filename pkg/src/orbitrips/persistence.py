"""Z/2 persistent homology of VR filtrations, fixed-scale Betti numbers, and
an independent dense-elimination homology oracle for cross-checking."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .complexes import (DEFAULT_BUDGET, DEFAULT_DIM_CAP, SimplicialComplex,
                        VRFiltration, vr_complex)
from .spaces import FiniteMetricSpace

__all__ = [
    "ORACLE_LIMIT",
    "Barcode",
    "BettiVector",
    "reduce_filtration",
    "betti_at",
    "homology_oracle",
    "format_barcode_tsv",
    "write_barcode_tsv",
    "read_barcode_tsv",
]

ORACLE_LIMIT = 20000


@dataclass
class Barcode:
    """Persistence intervals per homology dimension 0..dim_cap-1.

    `intervals[d]` holds (birth, death) with death = inf for essential classes;
    zero-length bars are dropped there but the raw simplex pairing is kept in
    `pairs` for verification.
    """

    dim_cap: int
    intervals: dict[int, list[tuple[float, float]]]
    pairs: dict[int, list[tuple[tuple, tuple | None]]] = field(repr=False, default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def bars(self, dim: int) -> list[tuple[float, float]]:
        return self.intervals.get(dim, [])

    def betti_alive_at(self, r: float, convention: str = "leq") -> tuple[int, ...]:
        """Number of bars containing r: birth cmp r < death (bars are [birth, death))."""
        out = []
        for d in range(self.dim_cap):
            if convention == "leq":
                alive = sum(1 for b, dd in self.intervals.get(d, []) if b <= r < dd)
            else:
                alive = sum(1 for b, dd in self.intervals.get(d, []) if b < r <= dd)
            out.append(alive)
        return tuple(out)


def _filtration_hash(filtration: VRFiltration) -> str:
    h = hashlib.sha256()
    h.update(f"{filtration.n}:{filtration.dim_cap}:{len(filtration.entries)}".encode())
    if filtration.entries:
        vals = np.array([v for v, _ in filtration.entries], dtype=np.float64)
        verts = np.array([i for _, s in filtration.entries for i in s], dtype=np.int64)
        h.update(vals.tobytes())
        h.update(verts.tobytes())
    return h.hexdigest()


def reduce_filtration(filtration: VRFiltration) -> Barcode:
    """Standard Z/2 column reduction in filtration order, with clearing.

    Boundary matrices are graded by dimension and processed top dimension
    first; when a column acquires pivot row i, column i of the next matrix
    down is cleared (known zero) instead of being reduced.  Columns are
    bit-packed integers; the pivot is the face latest in filtration order.
    """
    by_dim: dict[int, list[tuple[float, tuple[int, ...]]]] = {}
    for value, verts in filtration.entries:
        by_dim.setdefault(len(verts) - 1, []).append((value, verts))
    top = max(by_dim) if by_dim else 0
    pos: dict[int, dict[tuple[int, ...], int]] = {
        d: {verts: i for i, (_, verts) in enumerate(entries)}
        for d, entries in by_dim.items()
    }

    # killed[d][i] = (death value, killing simplex) for dim-d simplex index i;
    # negatives[d] = columns that became pivot owners (they create no class).
    killed: dict[int, dict[int, tuple[float, tuple[int, ...]]]] = {d: {} for d in by_dim}
    negatives: dict[int, set[int]] = {d: set() for d in by_dim}
    cleared: set[int] = set()

    for d in range(top, 0, -1):
        entries = by_dim.get(d, [])
        if not entries or (d - 1) not in by_dim:
            cleared = set()
            continue
        facepos = pos[d - 1]
        pivots: dict[int, int] = {}
        next_cleared: set[int] = set()
        neg = negatives[d]
        for j, (value, verts) in enumerate(entries):
            if j in cleared:
                continue  # pivot row of the dimension above: positive, already paired
            col = 0
            for k in range(len(verts)):
                face = verts[:k] + verts[k + 1:]
                col |= 1 << facepos[face]
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    killed[d - 1][low] = (value, verts)
                    next_cleared.add(low)
                    neg.add(j)
                    break
                col ^= other
        cleared = next_cleared

    intervals: dict[int, list[tuple[float, float]]] = {}
    pairs: dict[int, list[tuple[tuple, tuple | None]]] = {}
    for d in range(min(filtration.dim_cap, top + 1)):
        bars = []
        raw = []
        for i, (birth, verts) in enumerate(by_dim.get(d, [])):
            if i in negatives.get(d, set()):
                continue  # negative simplex: kills a (d-1)-class, creates nothing
            death = killed[d].get(i)
            if death is None:
                bars.append((birth, math.inf))
                raw.append(((birth, verts), None))
            else:
                dval, dverts = death
                raw.append(((birth, verts), (dval, dverts)))
                if dval != birth:
                    bars.append((birth, dval))
        bars.sort()
        intervals[d] = bars
        pairs[d] = raw
    for d in range(min(filtration.dim_cap, top + 1), filtration.dim_cap):
        intervals[d] = []
        pairs[d] = []

    return Barcode(
        dim_cap=filtration.dim_cap,
        intervals=intervals,
        pairs=pairs,
        provenance={"field": "Z/2", "n_simplices": len(filtration.entries),
                    "filtration_hash": _filtration_hash(filtration)},
    )


@dataclass
class BettiVector:
    """Z/2 Betti numbers b_0..b_{dim_cap-1} of a fixed-scale complex."""

    r: float
    convention: str
    dim_cap: int
    values: tuple[int, ...]
    provenance: dict = field(default_factory=dict)


def _gf2_rank(columns: list[int]) -> int:
    """Rank over Z/2 of a matrix given as bit-packed columns."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank


def _boundary_columns(complex_: SimplicialComplex, d: int) -> list[int]:
    below = {verts: i for i, verts in enumerate(complex_.simplices.get(d - 1, []))}
    cols = []
    for verts in complex_.simplices.get(d, []):
        col = 0
        for k in range(len(verts)):
            col |= 1 << below[verts[:k] + verts[k + 1:]]
        cols.append(col)
    return cols


def betti_at(space: FiniteMetricSpace, r: float, convention: str = "leq",
             dim_cap: int = DEFAULT_DIM_CAP, budget: int = DEFAULT_BUDGET) -> BettiVector:
    """Betti numbers of VR(space, r) over Z/2 from boundary-operator ranks.

    b_k = nullity(d_k) - rank(d_{k+1}); reading the barcode of the full VR
    filtration at r must agree (asserted in the test suite, not here).
    """
    cx = vr_complex(space, r, convention=convention, dim_cap=dim_cap, budget=budget)
    counts = [len(cx.simplices.get(d, [])) for d in range(dim_cap + 1)]
    ranks = [0] * (dim_cap + 2)
    for d in range(1, dim_cap + 1):
        if counts[d]:
            ranks[d] = _gf2_rank(_boundary_columns(cx, d))
    values = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(dim_cap))

    top_nonempty = max((d for d in range(dim_cap + 1) if counts[d]), default=0)
    provenance = {"counts": counts, "kind": "vr"}
    if top_nonempty < dim_cap:
        chi_simplices = sum((-1) ** d * counts[d] for d in range(dim_cap + 1))
        chi_betti = sum((-1) ** k * values[k] for k in range(dim_cap))
        if chi_simplices != chi_betti:
            raise AssertionError(
                f"Euler characteristic mismatch: {chi_simplices} != {chi_betti}")
        provenance["euler"] = "verified"
    else:
        provenance["euler"] = "skipped"
    return BettiVector(r=float(r), convention=convention, dim_cap=dim_cap,
                       values=values, provenance=provenance)


def homology_oracle(complex_: SimplicialComplex) -> tuple[int, ...]:
    """Betti numbers by dense Z/2 Gaussian elimination on each boundary matrix.

    Deliberately naive and structurally unrelated to the reduction code above;
    refuses complexes with more than ORACLE_LIMIT simplices.
    """
    if complex_.total > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to {ORACLE_LIMIT} simplices, got {complex_.total}")
    dim_cap = complex_.dim_cap
    counts = [len(complex_.simplices.get(d, [])) for d in range(dim_cap + 1)]
    ranks = [0] * (dim_cap + 2)
    for d in range(1, dim_cap + 1):
        rows, cols = counts[d - 1], counts[d]
        if not rows or not cols:
            continue
        index = {verts: i for i, verts in enumerate(complex_.simplices[d - 1])}
        M = np.zeros((rows, cols), dtype=np.uint8)
        for j, verts in enumerate(complex_.simplices[d]):
            for k in range(len(verts)):
                M[index[verts[:k] + verts[k + 1:]], j] = 1
        ranks[d] = _dense_rank_gf2(M)
    return tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(dim_cap))


def _dense_rank_gf2(M: np.ndarray) -> int:
    M = M.copy()
    rows, cols = M.shape
    rank = 0
    for c in range(cols):
        hits = np.flatnonzero(M[rank:, c])
        if hits.size == 0:
            continue
        p = rank + int(hits[0])
        if p != rank:
            M[[rank, p]] = M[[p, rank]]
        others = np.flatnonzero(M[:, c])
        others = others[others != rank]
        if others.size:
            M[others] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def format_barcode_tsv(barcode: Barcode, header_lines: list[str] | None = None) -> str:
    lines = [f"# {line}" for line in header_lines or []]
    lines.append("# dim\tbirth\tdeath")
    for d in range(barcode.dim_cap):
        for birth, death in barcode.intervals.get(d, []):
            dtxt = "inf" if math.isinf(death) else repr(death)
            lines.append(f"{d}\t{birth!r}\t{dtxt}")
    return "\n".join(lines) + "\n"


def write_barcode_tsv(barcode: Barcode, path, header_lines: list[str] | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_barcode_tsv(barcode, header_lines))


def read_barcode_tsv(path) -> dict[int, list[tuple[float, float]]]:
    out: dict[int, list[tuple[float, float]]] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            dim, birth, death = line.split("\t")
            out.setdefault(int(dim), []).append(
                (float(birth), math.inf if death == "inf" else float(death)))
    return out
