"""Anchored lift searches shared by the action checks and the isomorphism
certificates.

A subset of orbits {a_1 < ... < a_k} is lifted by fixing the canonical
representative of a_1 (the anchor) and choosing one member from each other
orbit.  Every unanchored lift is carried to an anchored one by a single group
element, so uniqueness up to the action is equivalent to uniqueness among
anchored tuples whenever no nonidentity element moves a point by less than
the scale (the doubled-point condition checked separately).
"""

from __future__ import annotations

import math

__all__ = [
    "EQ_EPS",
    "anchored_lifts_within",
    "anchored_min_diameter",
    "anchored_witnessed_lifts",
]

EQ_EPS = 1e-9


def anchored_lifts_within(
    Dl: list[list[float]],
    members_by_orbit: list[list[int]],
    orbits: tuple[int, ...],
    bound: float,
    strict: bool = True,
) -> list[tuple[float, tuple[int, ...]]]:
    """All anchored lift tuples with diameter < bound (<= bound if not strict).

    Returns (diameter, points) pairs in lexicographic order of the point
    tuples; member lists are assumed sorted ascending.
    """
    anchor = members_by_orbit[orbits[0]][0]
    k = len(orbits)
    out: list[tuple[float, tuple[int, ...]]] = []

    def admit(d: float) -> bool:
        return d < bound if strict else d <= bound

    def rec(chosen: list[int], diam: float) -> None:
        i = len(chosen)
        if i == k:
            out.append((diam, tuple(chosen)))
            return
        for y in members_by_orbit[orbits[i]]:
            row = Dl[y]
            nd = diam
            ok = True
            for x in chosen:
                d = row[x]
                if not admit(d):
                    ok = False
                    break
                if d > nd:
                    nd = d
            if ok:
                rec(chosen + [y], nd)

    rec([anchor], 0.0)
    return out


def anchored_min_diameter(
    Dl: list[list[float]],
    members_by_orbit: list[list[int]],
    orbits: tuple[int, ...],
) -> tuple[float, list[tuple[int, ...]]]:
    """Minimum diameter over all anchored lift tuples, with every tuple
    achieving it (exact float equality), in lexicographic order."""
    anchor = members_by_orbit[orbits[0]][0]
    k = len(orbits)
    best = math.inf

    def rec_min(chosen: list[int], diam: float) -> None:
        nonlocal best
        i = len(chosen)
        if i == k:
            if diam < best:
                best = diam
            return
        for y in members_by_orbit[orbits[i]]:
            row = Dl[y]
            nd = diam
            ok = True
            for x in chosen:
                d = row[x]
                if d >= best:  # cannot beat the incumbent minimum
                    ok = False
                    break
                if d > nd:
                    nd = d
            if ok:
                rec_min(chosen + [y], nd)

    rec_min([anchor], 0.0)
    if math.isinf(best):
        return best, []
    achievers = [t for d, t in
                 anchored_lifts_within(Dl, members_by_orbit, orbits, best, strict=False)
                 if d == best]
    return best, achievers


def anchored_witnessed_lifts(
    ball_masks: list[int],
    members_by_orbit: list[list[int]],
    orbits: tuple[int, ...],
) -> list[tuple[tuple[int, ...], int]]:
    """Anchored lift tuples whose balls share a sample point, with one witness.

    `ball_masks[x]` is the bit set of sample points inside the ball around x.
    Returns (points, witness) pairs in lexicographic order of the point tuples;
    the witness is the lowest-index common sample point.
    """
    anchor = members_by_orbit[orbits[0]][0]
    k = len(orbits)
    out: list[tuple[tuple[int, ...], int]] = []

    def rec(chosen: list[int], mask: int) -> None:
        i = len(chosen)
        if i == k:
            out.append((tuple(chosen), (mask & -mask).bit_length() - 1))
            return
        for y in members_by_orbit[orbits[i]]:
            m2 = mask & ball_masks[y]
            if m2:
                rec(chosen + [y], m2)

    start = ball_masks[anchor]
    if start:
        rec([anchor], start)
    return out
