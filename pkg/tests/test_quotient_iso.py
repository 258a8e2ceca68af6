import numpy as np
import pytest

from orbitrips.actions import (antipodal_generator, block_shift_generator,
                               build_quotient, circle_rotation_generator,
                               close_group)
from orbitrips.complexes import SimplicialComplex, vr_complex
from orbitrips.quotient_iso import (induced_action, iso_check,
                                    quotient_complex, verify_certificate)
from orbitrips.spaces import ShapeSpec, critical_values, generate_space

from conftest import random_rotated_cloud


def _circle12_antipodal():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 12}))
    action = close_group(12, [antipodal_generator(12)])
    return space, action


def test_induced_action_is_a_permutation_homomorphism():
    space, action = _circle12_antipodal()
    cx = vr_complex(space, 0.2, "leq", dim_cap=3)
    perms = induced_action(cx, action)
    for dim, plist in perms.items():
        count = len(cx.simplices[dim])
        assert len(plist) == len(action.elements)
        assert plist[0] == list(range(count))      # identity acts trivially
        for p in plist:
            assert sorted(p) == list(range(count))
        for i in range(len(action.elements)):
            for j in range(len(action.elements)):
                k = action.multiply(i, j)
                composed = [plist[i][v] for v in plist[j]]
                assert composed == plist[k]


def test_induced_action_guards_invariance():
    cx = SimplicialComplex(3, "vr", "leq", 1.0, 1,
                           {0: [(0,), (1,), (2,)], 1: [(0, 1)]})
    action = close_group(3, [[2, 1, 0]])
    with pytest.raises(ValueError):
        induced_action(cx, action)   # (0,1) should map to the absent (1,2)


def test_quotient_complex_structure():
    space, action = _circle12_antipodal()
    q = build_quotient(space, action)
    cx = vr_complex(space, 0.2, "leq", dim_cap=3)
    qc = quotient_complex(cx, action, q.proj)
    arrays = action.element_arrays
    for dim, reps in qc.reps.items():
        base = cx.simplices[dim]
        assert sum(qc.sizes[dim]) == len(base)
        assert reps == sorted(reps)
        assert set(qc.class_of[dim]) == set(base)
        for cid, rep in enumerate(reps):
            orbit = {tuple(sorted(int(a[v]) for v in rep)) for a in arrays}
            assert rep == min(orbit)
            assert qc.sizes[dim][cid] == len(orbit)
            assert all(qc.class_of[dim][s] == cid for s in orbit)
            expected_img = tuple(sorted(int(q.proj[v]) for v in rep))
            assert qc.images[dim][cid] == expected_img
            assert qc.degenerate[dim][cid] == (len(set(expected_img)) < dim + 1)


def test_quotient_complex_guards_invariance():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 4}))
    action = close_group(4, [circle_rotation_generator(4, 1)])
    broken = SimplicialComplex(4, "vr", "leq", 0.25, 1,
                               {0: [(i,) for i in range(4)], 1: [(0, 1)]})
    with pytest.raises(ValueError):
        quotient_complex(broken, action, build_quotient(space, action).proj)


def test_antipodal_circle_isomorphic_below_threshold():
    space, action = _circle12_antipodal()
    cert = iso_check(space, action, 0.16, "vr", "lt")
    assert cert.verdict == "isomorphic"
    assert cert.counts_base[0] == 12 and cert.counts_base[1] == 12
    assert cert.counts_orbits[0] == 6 and cert.counts_orbits[1] == 6
    assert cert.counts_quotient == cert.counts_orbits
    assert verify_certificate(space, action, cert)


def test_antipodal_circle_not_surjective_at_closed_scale():
    # at d <= 1/6 the quotient gains the triangle {0,2,4}, whose smallest
    # lift has diameter 1/3: the projection misses it
    space, action = _circle12_antipodal()
    cert = iso_check(space, action, 1 / 6, "vr", "leq")
    assert cert.verdict == "not-surjective"
    ce = cert.counterexample
    assert ce["dim"] == 2
    assert ce["missing"] == [0, 2, 4]
    assert ce["min_lift_diam"] == 1 / 3
    assert len(ce["min_lifts"]) == 4
    assert cert.counts_orbits[2] == 6 and cert.counts_quotient[2] == 8
    assert verify_certificate(space, action, cert)


def test_transitive_action_degenerate_once_edges_appear():
    space = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 12}))
    action = close_group(12, [circle_rotation_generator(12, 1)])
    below = iso_check(space, action, 0.05, "vr", "lt")
    assert below.verdict == "isomorphic"    # single vertex on both sides
    assert below.counts_orbits == {0: 1, 1: 0, 2: 0, 3: 0}
    above = iso_check(space, action, 0.1, "vr", "lt")
    assert above.verdict == "degenerate"
    assert above.counterexample["image"] == [0, 0]
    assert verify_certificate(space, action, above)


def test_six_circles_verdict_ladder():
    space = generate_space(ShapeSpec("six-circles", {"m": 12}))
    action = close_group(72, [block_shift_generator(6, 12)])
    # avoid r=1.0 for m=12: the 2-step chord is exactly 1.0 in real
    # arithmetic and rounds to either side of it per circle
    iso = iso_check(space, action, 0.9, "vr", "lt")
    assert iso.verdict == "isomorphic"
    assert verify_certificate(space, action, iso)

    # every point moves by >= 3 under the rotation, so at 2.5 nothing is
    # degenerate yet, but distinct orbit pairs already project onto one
    # quotient edge
    ni = iso_check(space, action, 2.5, "vr", "lt")
    assert ni.verdict == "not-injective"
    ce = ni.counterexample
    assert len(ce["simplices"]) >= 2
    assert verify_certificate(space, action, ni)

    # past the minimal displacement, degeneracy takes precedence
    dg = iso_check(space, action, 3.5, "vr", "lt")
    assert dg.verdict == "degenerate"
    assert dg.counterexample["dim"] == 1
    assert dg.counterexample["orbit_size"] == 6
    img = dg.counterexample["image"]
    assert img[0] == img[1]
    assert verify_certificate(space, action, dg)


def test_cech_iso_and_not_surjective():
    space = generate_space(ShapeSpec("evenly-spaced-circle",
                                     {"n": 36, "circumference": 3.0}))
    action = close_group(36, [circle_rotation_generator(36, 12)])
    good = iso_check(space, action, 0.25, "cech", "lt")
    assert good.verdict == "isomorphic"
    assert verify_certificate(space, action, good)
    bad = iso_check(space, action, 1 / 3 + 1e-9, "cech", "lt")
    assert bad.verdict != "isomorphic"
    assert verify_certificate(space, action, bad)


def test_verdicts_replay_on_random_clouds(rng):
    for _ in range(4):
        space, action = random_rotated_cloud(rng, m=3, k=3)
        cv = critical_values(space)
        for i in (2, len(cv) // 2, len(cv) - 2):
            r = float(cv[i])
            for kind in ("vr", "cech"):
                cert = iso_check(space, action, r, kind, "lt")
                assert verify_certificate(space, action, cert), (kind, r, cert.verdict)
                if cert.verdict == "isomorphic":
                    assert cert.counts_orbits == cert.counts_quotient


def test_bad_kind_rejected():
    space, action = _circle12_antipodal()
    with pytest.raises(ValueError):
        iso_check(space, action, 0.1, kind="alpha")
