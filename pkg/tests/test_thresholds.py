import math

import numpy as np
import pytest

from orbitrips.actions import (antipodal_generator, block_shift_generator,
                               build_quotient, circle_rotation_generator,
                               close_group)
from orbitrips.spaces import (FiniteMetricSpace, ShapeSpec, critical_values,
                              generate_space)
from orbitrips.thresholds import (ball_threshold, diameter_action_check,
                                  distance_threshold, nerve_action_check,
                                  threshold_scan, verify_witness)

from conftest import (brute_ball_ok, brute_diameter_ok, brute_distance_ok,
                      brute_nerve_ok, random_rotated_cloud)


def _circle12_antipodal():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 12}))
    action = close_group(12, [antipodal_generator(12)])
    return space, action


def test_distance_threshold_antipodal_circle():
    space, action = _circle12_antipodal()
    rep = distance_threshold(space, action)
    assert rep.passes_at == 0.5          # every point moves half the circle
    assert math.isinf(rep.fails_at)      # no larger critical value exists
    assert not rep.vacuous
    assert verify_witness(space, action, "distance", 0.5 + 1e-9, rep.witness)


def test_distance_threshold_small_rotation():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 12}))
    action = close_group(12, [circle_rotation_generator(12, 1)])
    rep = distance_threshold(space, action)
    assert rep.passes_at == 1 / 12
    assert rep.fails_at == 2 / 12
    assert rep.resolution == rep.fails_at - rep.passes_at


def test_ball_threshold_antipodal_circle():
    space, action = _circle12_antipodal()
    rep = ball_threshold(space, action)
    assert rep.passes_at == 0.25         # y halfway between x and x + 6
    assert rep.fails_at == 1 / 3
    assert verify_witness(space, action, "ball", 0.25 + 1e-9, rep.witness)


def test_trivial_group_is_vacuous():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 5}))
    action = close_group(5, [])
    for kind in ("distance", "ball"):
        rep = threshold_scan(space, action, kind)
        assert rep.vacuous
        assert math.isinf(rep.passes_at)


def test_diameter_scan_antipodal_circle_pinned():
    space, action = _circle12_antipodal()
    rep = threshold_scan(space, action, "diameter", k_max=3)
    assert rep.passes_at == 1 / 6
    assert rep.fails_at == 0.25
    assert rep.scanned == 3
    w = rep.witness
    assert w["mode"] == "no_equality_lift"
    assert w["orbits"] == [0, 2, 4]
    assert w["qdiam"] == 1 / 6
    assert w["min_lift_diam"] == 1 / 3
    assert len(w["min_lifts"]) == 4      # all four anchored lifts tie at 1/3
    assert verify_witness(space, action, "diameter", w["scale"], w)


def test_diameter_scan_threefold_circle_pinned():
    space = generate_space(ShapeSpec("evenly-spaced-circle",
                                     {"n": 36, "circumference": 3.0}))
    action = close_group(36, [circle_rotation_generator(36, 12)])
    rep = threshold_scan(space, action, "diameter", k_max=3)
    assert rep.passes_at == 1 / 3
    assert rep.fails_at == 5 / 12
    assert verify_witness(space, action, "diameter", rep.witness["scale"], rep.witness)


def test_nerve_scan_threefold_circle_pinned():
    space = generate_space(ShapeSpec("evenly-spaced-circle",
                                     {"n": 36, "circumference": 3.0}))
    action = close_group(36, [circle_rotation_generator(36, 12)])
    rep = threshold_scan(space, action, "nerve", k_max=3)
    assert rep.passes_at == 0.25
    assert rep.fails_at == 1 / 3
    w = rep.witness
    assert w["mode"] == "lift_not_unique"
    assert w["orbits"] == [0, 6]
    assert w["lifts"] == [[0, 6], [0, 30]]
    assert w["witnesses"] == [3, 33]
    assert verify_witness(space, action, "nerve", w["scale"], w)


def test_nerve_scan_antipodal_circle48_pinned():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 48}))
    action = close_group(48, [antipodal_generator(48)])
    rep = threshold_scan(space, action, "nerve", k_max=3)
    assert rep.passes_at == 6 / 48
    assert rep.fails_at == 7 / 48
    assert verify_witness(space, action, "nerve", rep.witness["scale"], rep.witness)


def test_fixed_point_fails_doubles_part_everywhere():
    D = np.array([[0.0, 1.0, 2.0],
                  [1.0, 0.0, 1.0],
                  [2.0, 1.0, 0.0]])
    space = FiniteMetricSpace(D)
    action = close_group(3, [[2, 1, 0]])  # reflection fixing point 1
    res = diameter_action_check(space, action, 0.5)
    assert not res.ok
    assert res.witness["part"] == "doubles"
    assert res.witness["moved"] == 0.0
    nres = nerve_action_check(space, action, 0.5)
    assert not nres.ok
    assert nres.witness["part"] == "doubles"
    assert nres.witness["fixed_point"]
    rep = threshold_scan(space, action, "diameter")
    assert rep.passes_at == 0.0
    assert rep.fails_at == 1.0


def test_custom_grid_is_respected():
    space, action = _circle12_antipodal()
    rep = threshold_scan(space, action, "diameter", r_values=[0.1, 0.3])
    assert rep.passes_at == 0.1
    assert rep.fails_at == 0.3
    assert rep.scanned == 2


def test_unknown_kind_rejected():
    space, action = _circle12_antipodal()
    with pytest.raises(ValueError):
        threshold_scan(space, action, "perimeter")


def test_distance_and_ball_match_brute(rng):
    for _ in range(5):
        space, action = random_rotated_cloud(rng, m=4, k=3)
        for kind, brute in (("distance", brute_distance_ok),
                            ("ball", brute_ball_ok)):
            rep = threshold_scan(space, action, kind)
            r_lo = rep.passes_at * 0.999
            assert brute(space.dist, action, r_lo)
            assert brute(space.dist, action, rep.passes_at)  # holds at the min itself
            if math.isfinite(rep.fails_at):
                assert not brute(space.dist, action, rep.fails_at * 1.001)


def test_diameter_check_matches_brute(rng):
    for _ in range(4):
        space, action = random_rotated_cloud(rng, m=3, k=3)
        cv = critical_values(space)
        picks = sorted(rng.choice(len(cv), size=min(6, len(cv)), replace=False))
        for i in picks:
            r = float(cv[i])
            res = diameter_action_check(space, action, r, k_max=3)
            assert res.ok == brute_diameter_ok(space, action, r, 3), r
            if not res.ok:
                assert verify_witness(space, action, "diameter", r, res.witness)


def test_nerve_check_matches_brute(rng):
    for _ in range(4):
        space, action = random_rotated_cloud(rng, m=3, k=3)
        cv = critical_values(space)
        picks = sorted(rng.choice(len(cv), size=min(6, len(cv)), replace=False))
        for i in picks:
            r = float(cv[i])
            res = nerve_action_check(space, action, r, k_max=3)
            assert res.ok == brute_nerve_ok(space, action, r, 3), r
            if not res.ok:
                assert verify_witness(space, action, "nerve", r, res.witness)


@pytest.mark.parametrize("kind", ["diameter", "nerve"])
def test_scan_brackets_match_brute_transition(rng, kind):
    brute = brute_diameter_ok if kind == "diameter" else brute_nerve_ok
    for _ in range(3):
        space, action = random_rotated_cloud(rng, m=3, k=2)
        rep = threshold_scan(space, action, kind, k_max=3)
        grid = [float(v) for v in critical_values(space)]
        first_fail = next((r for r in grid if not brute(space, action, r, 3)),
                          math.inf)
        assert rep.fails_at == first_fail
        if math.isfinite(first_fail):
            idx = grid.index(first_fail)
            expected_pass = grid[idx - 1] if idx else 0.0
            assert rep.passes_at == expected_pass


def test_six_circles_extra_lift_mode():
    space = generate_space(ShapeSpec("six-circles", {"m": 12}))
    action = close_group(72, [block_shift_generator(6, 12)])
    res = diameter_action_check(space, action, 2.5, k_max=3)
    assert not res.ok
    assert res.witness["part"] == "sets"
    assert res.witness["mode"] == "extra_lift_within_scale"
    assert verify_witness(space, action, "diameter", 2.5, res.witness)
