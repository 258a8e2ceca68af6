"""Quantitative checks on how a group action interacts with a scale r, and
scans that bracket the largest scale at which each property holds.

Four properties of an isometric action, each parametrized by r:

- distance: every nonidentity element moves every point by at least r.
- ball: no point lies within r of both x and g.x for any nonidentity g.
- diameter: subsets of the quotient with diameter < r (up to k_max+1 points)
  lift to the base space uniquely up to the action, the unique lift having the
  same diameter, and with no second lift of diameter < r.
- nerve: subsets of quotient balls of radius r with a common sample point lift
  uniquely up to the action to base balls with a common sample point.

The diameter and nerve properties are exactly what make the quotient of the
Vietoris-Rips (resp. Cech) complex at scale r isomorphic to the complex of the
quotient metric space, so their checks double as certificates for iso_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import IsometricAction, QuotientSpace, build_quotient
from .complexes import (DEFAULT_BUDGET, DEFAULT_DIM_CAP, cech_complex,
                        vr_complex)
from .lifts import (EQ_EPS, anchored_lifts_within, anchored_min_diameter,
                    anchored_witnessed_lifts)
from .spaces import FiniteMetricSpace, critical_values

__all__ = [
    "ActionCheckResult",
    "ThresholdReport",
    "distance_threshold",
    "ball_threshold",
    "diameter_action_check",
    "nerve_action_check",
    "threshold_scan",
    "verify_witness",
]


@dataclass
class ActionCheckResult:
    """Outcome of one property check at a fixed scale."""

    kind: str
    r: float
    ok: bool
    k_max: int = DEFAULT_DIM_CAP
    convention: str = "lt"
    witness: dict | None = None
    subsets_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "ok": self.ok,
            "k_max": self.k_max,
            "convention": self.convention,
            "witness": self.witness,
            "subsets_checked": self.subsets_checked,
        }


@dataclass
class ThresholdReport:
    """Bracketing of the largest scale at which a property holds.

    The property holds at passes_at and fails at fails_at (both were checked);
    resolution = fails_at - passes_at is the width of the bracket.  For the
    distance and ball kinds the threshold is computed exactly rather than
    scanned, so passes_at is the exact supremum of passing scales.
    """

    kind: str
    k_max: int
    convention: str
    passes_at: float
    fails_at: float
    witness: dict | None = None
    resolution: float | None = None
    scanned: int = 0
    vacuous: bool = False
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def _num(v):
            if v is None:
                return None
            return "inf" if math.isinf(v) else v
        return {
            "kind": self.kind,
            "k_max": self.k_max,
            "convention": self.convention,
            "passes_at": _num(self.passes_at),
            "fails_at": _num(self.fails_at),
            "witness": self.witness,
            "resolution": _num(self.resolution),
            "scanned": self.scanned,
            "vacuous": self.vacuous,
            "provenance": self.provenance,
        }


def _moved_minimum(space: FiniteMetricSpace, action: IsometricAction):
    """Smallest d(x, g.x) over nonidentity g, with an argmin witness."""
    D = space.dist
    best = math.inf
    witness = None
    for gi in range(1, len(action.elements)):
        perm = action.element_arrays[gi]
        moved = D[np.arange(space.n), perm]
        x = int(np.argmin(moved))
        if moved[x] < best:
            best = float(moved[x])
            witness = {"g": gi, "x": x, "gx": int(perm[x]), "moved": float(moved[x])}
    return best, witness


def distance_threshold(space: FiniteMetricSpace, action: IsometricAction) -> ThresholdReport:
    """Exact threshold for the distance property: min over g != e of d(x, g.x).

    The property "every nonidentity element moves every point by at least r"
    holds exactly for r <= passes_at.
    """
    if len(action.elements) == 1:
        return ThresholdReport(kind="distance", k_max=0, convention="lt",
                               passes_at=math.inf, fails_at=math.inf,
                               vacuous=True)
    best, witness = _moved_minimum(space, action)
    crit = critical_values(space)
    above = crit[crit > best]
    fails_at = float(above[0]) if above.size else math.inf
    return ThresholdReport(kind="distance", k_max=0, convention="lt",
                           passes_at=best, fails_at=fails_at, witness=witness,
                           resolution=(fails_at - best) if math.isfinite(fails_at) else None,
                           provenance={"method": "exact-minimum"})


def ball_threshold(space: FiniteMetricSpace, action: IsometricAction) -> ThresholdReport:
    """Exact threshold for the ball property.

    passes_at = min over nonidentity g and sample points x, y of
    max(d(x, y), d(g.x, y)); open balls of radius r around x and g.x share a
    sample point iff that minimum is < r, so the property holds exactly for
    r <= passes_at.
    """
    if len(action.elements) == 1:
        return ThresholdReport(kind="ball", k_max=0, convention="lt",
                               passes_at=math.inf, fails_at=math.inf,
                               vacuous=True)
    D = space.dist
    best = math.inf
    witness = None
    for gi in range(1, len(action.elements)):
        perm = action.element_arrays[gi]
        # worst[x, y] = max(d(x, y), d(g.x, y))
        worst = np.maximum(D, D[perm, :])
        flat = int(np.argmin(worst))
        x, y = divmod(flat, space.n)
        if worst[x, y] < best:
            best = float(worst[x, y])
            witness = {"g": gi, "x": int(x), "gx": int(perm[x]), "y": int(y),
                       "value": float(worst[x, y])}
    crit = critical_values(space)
    above = crit[crit > best]
    fails_at = float(above[0]) if above.size else math.inf
    return ThresholdReport(kind="ball", k_max=0, convention="lt",
                           passes_at=best, fails_at=fails_at, witness=witness,
                           resolution=(fails_at - best) if math.isfinite(fails_at) else None,
                           provenance={"method": "exact-minimum"})


def _doubles_failure(space: FiniteMetricSpace, action: IsometricAction,
                     quotient: QuotientSpace, r: float, ball: bool,
                     ball_masks: list[int] | None = None) -> dict | None:
    """Doubled-point part of the diameter/nerve checks, at representatives.

    diameter flavor (ball=False): some nonidentity g moves a representative by
    less than r.  nerve flavor (ball=True): open balls around a representative
    and its g-image share a sample point.  Conjugating by the element that
    carries an arbitrary point to its representative shows checking at
    representatives suffices.
    """
    D = space.dist
    for a, rep in enumerate(quotient.reps):
        for gi in range(1, len(action.elements)):
            img = int(action.element_arrays[gi][rep])
            if not ball:
                if D[rep, img] < r:
                    return {"part": "doubles", "orbit": a, "g": gi,
                            "x": rep, "gx": img, "moved": float(D[rep, img])}
            else:
                common = ball_masks[rep] & ball_masks[img]
                if common:
                    y = (common & -common).bit_length() - 1
                    return {"part": "doubles", "orbit": a, "g": gi,
                            "x": rep, "gx": img, "y": y,
                            "value": float(max(D[rep, y], D[img, y])),
                            "fixed_point": img == rep}
    return None


def diameter_action_check(space: FiniteMetricSpace, action: IsometricAction,
                          r: float, k_max: int = DEFAULT_DIM_CAP,
                          quotient: QuotientSpace | None = None,
                          budget: int = DEFAULT_BUDGET) -> ActionCheckResult:
    """Check the diameter property at scale r for subsets of 2..k_max+1 orbits.

    A qualifying subset (quotient diameter < r) passes when exactly one
    anchored lift tuple has diameter < r and that tuple's diameter equals the
    quotient diameter.  Failure modes: no_equality_lift (even the smallest
    lift is strictly larger), equality_not_unique (two anchored lifts achieve
    it), extra_lift_within_scale (a second, larger lift still below r).
    Together with the doubled-point part this is exactly the condition under
    which the quotient of VR(space, r) matches VR(quotient space, r).
    """
    q = quotient if quotient is not None else build_quotient(space, action)
    doubles = _doubles_failure(space, action, q, r, ball=False)
    if doubles is not None:
        return ActionCheckResult(kind="diameter", r=float(r), ok=False,
                                 k_max=k_max, witness=doubles)

    qcx = vr_complex(q.space, r, convention="lt", dim_cap=k_max, budget=budget)
    Dl = space.dist.tolist()
    Ql = q.space.dist.tolist()
    members = q.members
    checked = 0
    for dim in range(1, k_max + 1):
        for orbits in qcx.simplices.get(dim, []):
            checked += 1
            qdiam = max(Ql[a][b] for i, a in enumerate(orbits) for b in orbits[i + 1:])
            min_diam, achievers = anchored_min_diameter(Dl, members, orbits)
            if min_diam > qdiam + EQ_EPS:
                witness = {"part": "sets", "mode": "no_equality_lift",
                           "orbits": list(orbits), "qdiam": qdiam,
                           "min_lift_diam": min_diam,
                           "min_lifts": [list(t) for t in achievers[:4]]}
                return ActionCheckResult(kind="diameter", r=float(r), ok=False,
                                         k_max=k_max, witness=witness,
                                         subsets_checked=checked)
            if len(achievers) > 1:
                witness = {"part": "sets", "mode": "equality_not_unique",
                           "orbits": list(orbits), "qdiam": qdiam,
                           "lifts": [list(t) for t in achievers[:4]]}
                return ActionCheckResult(kind="diameter", r=float(r), ok=False,
                                         k_max=k_max, witness=witness,
                                         subsets_checked=checked)
            extras = [t for d, t in
                      anchored_lifts_within(Dl, members, orbits, r, strict=True)
                      if t != achievers[0]]
            if extras:
                witness = {"part": "sets", "mode": "extra_lift_within_scale",
                           "orbits": list(orbits), "qdiam": qdiam,
                           "lift": list(achievers[0]),
                           "extra_lifts": [list(t) for t in extras[:4]]}
                return ActionCheckResult(kind="diameter", r=float(r), ok=False,
                                         k_max=k_max, witness=witness,
                                         subsets_checked=checked)
    return ActionCheckResult(kind="diameter", r=float(r), ok=True, k_max=k_max,
                             subsets_checked=checked)


def _ball_masks(space: FiniteMetricSpace, r: float, convention: str) -> list[int]:
    D = space.dist
    inside = D < r if convention == "lt" else D <= r
    if convention == "lt" and r > 0:
        np.fill_diagonal(inside, True)
    elif convention == "leq":
        np.fill_diagonal(inside, r >= 0)
    packed = np.packbits(inside, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def nerve_action_check(space: FiniteMetricSpace, action: IsometricAction,
                       r: float, k_max: int = DEFAULT_DIM_CAP,
                       convention: str = "lt",
                       quotient: QuotientSpace | None = None,
                       budget: int = DEFAULT_BUDGET) -> ActionCheckResult:
    """Check the nerve property at scale r for subsets of 2..k_max+1 orbits.

    Qualifying subsets are the simplices of the Cech complex of the quotient
    space (balls of radius r sharing a quotient sample point); each must have
    exactly one anchored lift tuple whose base balls share a base sample
    point.  A quotient witness always lifts, so the failure mode seen in
    practice is lift_not_unique; no_witnessed_lift is kept defensively.
    Together with the doubled-point part this matches the quotient of the
    Cech complex with the Cech complex of the quotient.
    """
    q = quotient if quotient is not None else build_quotient(space, action)
    masks = _ball_masks(space, r, convention)
    doubles = _doubles_failure(space, action, q, r, ball=True, ball_masks=masks)
    if doubles is not None:
        return ActionCheckResult(kind="nerve", r=float(r), ok=False,
                                 k_max=k_max, convention=convention,
                                 witness=doubles)

    qcx = cech_complex(q.space, r, convention=convention, dim_cap=k_max,
                       budget=budget)
    members = q.members
    checked = 0
    for dim in range(1, k_max + 1):
        for orbits in qcx.simplices.get(dim, []):
            checked += 1
            lifts = anchored_witnessed_lifts(masks, members, orbits)
            if len(lifts) == 1:
                continue
            if not lifts:
                witness = {"part": "sets", "mode": "no_witnessed_lift",
                           "orbits": list(orbits)}
            else:
                witness = {"part": "sets", "mode": "lift_not_unique",
                           "orbits": list(orbits),
                           "lifts": [list(t) for t, _ in lifts[:4]],
                           "witnesses": [w for _, w in lifts[:4]]}
            return ActionCheckResult(kind="nerve", r=float(r), ok=False,
                                     k_max=k_max, convention=convention,
                                     witness=witness, subsets_checked=checked)
    return ActionCheckResult(kind="nerve", r=float(r), ok=True, k_max=k_max,
                             convention=convention, subsets_checked=checked)


def threshold_scan(space: FiniteMetricSpace, action: IsometricAction,
                   kind: str, k_max: int = DEFAULT_DIM_CAP,
                   convention: str = "lt",
                   r_values=None, budget: int = DEFAULT_BUDGET) -> ThresholdReport:
    """Bracket the largest scale at which a property of the action holds.

    distance and ball are computed exactly.  diameter and nerve are scanned
    over the critical values of the base space (every quotient distance is a
    base distance, so this grid sees every scale at which the qualifying
    subsets or their lifts can change), in ascending order, stopping at the
    first failure; all four properties are monotone, so a single transition
    exists.
    """
    if kind == "distance":
        return distance_threshold(space, action)
    if kind == "ball":
        return ball_threshold(space, action)
    if kind not in ("diameter", "nerve"):
        raise ValueError(f"unknown threshold kind: {kind!r}")

    q = build_quotient(space, action)
    if r_values is None:
        grid = [float(v) for v in critical_values(space)]
    else:
        grid = sorted(float(v) for v in r_values)
    passes_at = 0.0
    fails_at = math.inf
    witness = None
    scanned = 0
    for r in grid:
        scanned += 1
        if kind == "diameter":
            res = diameter_action_check(space, action, r, k_max=k_max,
                                        quotient=q, budget=budget)
        else:
            res = nerve_action_check(space, action, r, k_max=k_max,
                                     convention=convention, quotient=q,
                                     budget=budget)
        if res.ok:
            passes_at = r
        else:
            fails_at = r
            witness = dict(res.witness or {})
            witness["scale"] = r
            break
    resolution = (fails_at - passes_at) if math.isfinite(fails_at) else None
    return ThresholdReport(kind=kind, k_max=k_max, convention=convention,
                           passes_at=passes_at, fails_at=fails_at,
                           witness=witness, resolution=resolution,
                           scanned=scanned,
                           provenance={"grid": "base-critical-values",
                                       "grid_size": len(grid)})


def verify_witness(space: FiniteMetricSpace, action: IsometricAction,
                   kind: str, r: float, witness: dict,
                   convention: str = "lt") -> bool:
    """Replay a failure witness against the definitions, from scratch."""
    D = space.dist
    if kind == "distance":
        g, x = witness["g"], witness["x"]
        img = int(action.element_arrays[g][x])
        return g != 0 and float(D[x, img]) < r
    if kind == "ball":
        g, x, y = witness["g"], witness["x"], witness["y"]
        img = int(action.element_arrays[g][x])
        return g != 0 and max(float(D[x, y]), float(D[img, y])) < r

    q = build_quotient(space, action)
    if witness.get("part") == "doubles":
        g, x = witness["g"], witness["x"]
        img = int(action.element_arrays[g][x])
        if g == 0:
            return False
        if kind == "diameter":
            return float(D[x, img]) < r
        masks = _ball_masks(space, r, convention)
        return bool(masks[x] & masks[img])

    orbits = tuple(witness["orbits"])
    members = q.members
    Dl = space.dist.tolist()
    Ql = q.space.dist.tolist()
    if kind == "diameter":
        qdiam = max(Ql[a][b] for i, a in enumerate(orbits) for b in orbits[i + 1:])
        if not qdiam < r:
            return False
        min_diam, achievers = anchored_min_diameter(Dl, members, orbits)
        mode = witness["mode"]
        if mode == "no_equality_lift":
            return min_diam > qdiam + EQ_EPS
        if mode == "equality_not_unique":
            return min_diam <= qdiam + EQ_EPS and len(achievers) > 1
        if mode == "extra_lift_within_scale":
            within = anchored_lifts_within(Dl, members, orbits, r, strict=True)
            return min_diam <= qdiam + EQ_EPS and len(achievers) == 1 and len(within) > 1
        return False
    if kind == "nerve":
        masks = _ball_masks(space, r, convention)
        qmasks = _ball_masks(q.space, r, convention)
        common = qmasks[orbits[0]]
        for a in orbits[1:]:
            common &= qmasks[a]
        if not common:
            return False  # subset does not qualify
        lifts = anchored_witnessed_lifts(masks, members, orbits)
        mode = witness["mode"]
        if mode == "no_witnessed_lift":
            return len(lifts) == 0
        if mode == "lift_not_unique":
            return len(lifts) > 1
        return False
    raise ValueError(f"unknown witness kind: {kind!r}")
