import math

import numpy as np
import pytest

from hellyfit.geometry import (
    DegenerateGeometryError,
    Rotation,
    UnsupportedDimensionError,
    VPolytope,
    convex_hull_2d,
    regular_polygon,
    unit_square,
)
from hellyfit.lp import beta_fixed_rotation
from hellyfit.nets import (
    EXACT_2D,
    SUFFICIENT_BOUND,
    RotationNet,
    _margin_fn,
    build_net_2d,
    build_net_sufficient,
    max_angle_2d,
    verify_net,
)

EPS_SQUARE = 1.0 - 1.0 / math.sqrt(2.0)


def random_hexagon(seed=123):
    rng = np.random.default_rng(seed)
    while True:
        pts = rng.normal(size=(6, 2))
        try:
            idx = convex_hull_2d(pts)
        except DegenerateGeometryError:
            continue
        if len(idx) == 6:
            return VPolytope(pts[idx])


def triangle_alpha(eps):
    # slack angle of the equilateral triangle: fit scale at angle theta is
    # 1 / (2 cos(pi/3 - theta)) on [0, pi/3], so the contact angle solves
    # (1 - eps) = fit scale
    return math.pi / 3.0 - math.acos(1.0 / (2.0 * (1.0 - eps)))


# ---------------------------------------------------------------------------
# max_angle_2d against closed forms


def test_square_contact_angle_closed_form():
    a = max_angle_2d(unit_square(), EPS_SQUARE)
    assert abs(a - math.pi / 4.0) <= 1e-6


def test_triangle_contact_angle_closed_form():
    tri = regular_polygon(3, 1.0)
    for eps in (0.35, 0.40, 0.45):
        a = max_angle_2d(tri, eps)
        assert abs(a - triangle_alpha(eps)) <= 1e-6, eps


def test_triangle_no_slack_at_zero_epsilon():
    assert max_angle_2d(regular_polygon(3, 1.0), 0.0) == 0.0


def test_ball_like_body_has_full_slack():
    # a 64-gon shrunk by 5% fits itself at every angle, so the scan caps at pi
    a = max_angle_2d(regular_polygon(64, 1.0), 0.05)
    assert a == math.pi


def test_triangle_full_slack_above_half():
    # below scale 1/2 the triangle fits itself at every rotation
    assert max_angle_2d(regular_polygon(3, 1.0), 0.6) == math.pi


def test_max_angle_monotone_in_epsilon():
    shapes = [regular_polygon(3, 1.0), unit_square(), random_hexagon()]
    grid = (0.15, 0.25, 0.35, 0.45)
    for K in shapes:
        vals = [max_angle_2d(K, e, tol=2e-3) for e in grid]
        for lo, hi in zip(vals, vals[1:]):
            assert hi >= lo - 1e-6


def test_max_angle_rejects_bad_inputs():
    with pytest.raises(ValueError):
        max_angle_2d(unit_square(), 1.0)
    with pytest.raises(ValueError):
        max_angle_2d(unit_square(), -0.1)
    with pytest.raises(UnsupportedDimensionError):
        cube = VPolytope(np.array([[x, y, z] for x in (0, 1) for y in (0, 1)
                                   for z in (0, 1)], dtype=float))
        max_angle_2d(cube, 0.1)
    with pytest.raises(DegenerateGeometryError):
        max_angle_2d(VPolytope(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])), 0.1)


def test_reduced_margin_matches_full_lp():
    rng = np.random.default_rng(4)
    for K in (unit_square(), regular_polygon(5, 1.0, phase=0.2), random_hexagon()):
        margin = _margin_fn(K, 0.2)
        PK = K.hull_halfspaces()
        for theta in rng.uniform(-math.pi, math.pi, 6):
            res = beta_fixed_rotation(K, Rotation.from_angle(float(theta)), PK,
                                      canonical=False)
            assert abs(margin(float(theta)) - (res.value - 0.8)) <= 1e-10


# ---------------------------------------------------------------------------
# build_net_2d


def test_square_net_is_the_four_right_angles():
    net = build_net_2d(unit_square(), EPS_SQUARE)
    assert len(net) == 4
    assert net.certificate == EXACT_2D
    # every multiple of pi/2 is represented (circular distance)
    for k in range(4):
        target = k * math.pi / 2.0
        diffs = [abs((a - target + math.pi) % (2 * math.pi) - math.pi)
                 for a in net.angles()]
        assert min(diffs) <= 1e-6


def test_64gon_net_is_small():
    net = build_net_2d(regular_polygon(64, 1.0), 0.05)
    assert len(net) <= 32


def test_net_rejects_zero_slack():
    with pytest.raises(DegenerateGeometryError):
        build_net_2d(regular_polygon(3, 1.0), 1e-9)


def test_net_json_round_trip():
    net = build_net_2d(random_hexagon(), 0.15)
    blob = net.to_json()
    assert set(blob) == {"epsilon", "certificate", "rotations"}
    back = RotationNet.from_json(blob)
    assert len(back) == len(net)
    assert back.epsilon == net.epsilon
    assert back.certificate == net.certificate
    for a, b in zip(net.rotations, back.rotations):
        assert np.allclose(a.matrix, b.matrix, atol=1e-15)


# ---------------------------------------------------------------------------
# build_net_sufficient


def test_sufficient_net_matches_spacing_formula_2d():
    # near-ball body: r/R ~ 1, eps = 0.1 -> t = ceil(pi / arcsin(0.05)) = 63
    net = build_net_sufficient(regular_polygon(256, 1.0), 0.1)
    assert net.certificate == SUFFICIENT_BOUND
    assert abs(len(net) - 63) <= 1


def test_sufficient_net_3d_builds_and_verifies():
    cube = VPolytope(np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1)
                               for z in (-1, 1)], dtype=float))
    net = build_net_sufficient(cube, 0.55)
    assert net.dim == 3
    rep = verify_net(net, cube, trials=10, seed=2)
    assert rep.ok
    assert rep.worst_margin > 0.0


def test_sufficient_net_rejects_high_dimension():
    rng = np.random.default_rng(0)
    pts = np.vstack([np.eye(4), -np.eye(4), rng.normal(size=(8, 4)) * 0.1])
    with pytest.raises(UnsupportedDimensionError):
        build_net_sufficient(VPolytope(pts), 0.3)


# ---------------------------------------------------------------------------
# verify_net


def test_verify_square_net_100_trials():
    net = build_net_2d(unit_square(), EPS_SQUARE)
    rep = verify_net(net, unit_square(), trials=100, seed=0)
    assert rep.trials == 100
    assert rep.passes == 100
    assert rep.failures == 0
    assert rep.worst_margin >= -1e-9


def test_verify_trivial_net_on_rotation_invariant_body():
    body = regular_polygon(256, 1.0)
    net = RotationNet((Rotation.identity(2),), 0.1, "", SUFFICIENT_BOUND)
    rep = verify_net(net, body, trials=50, seed=1)
    assert rep.ok


def test_verify_flags_a_known_bad_net():
    # identity-only net cannot cover a quarter turn of a long thin rectangle
    rect = VPolytope(np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [0.0, 1.0]]))
    net = RotationNet((Rotation.identity(2),), 0.01, "", SUFFICIENT_BOUND)
    rep = verify_net(net, rect, rotations=[Rotation.from_angle(math.pi / 2.0)])
    assert rep.failures == 1
    assert rep.worst_margin < 0.0
    assert len(rep.failed_rotations) == 1
    blob = rep.to_json()
    assert blob["failures"] == 1


def test_verify_report_json_shape():
    net = build_net_2d(unit_square(), EPS_SQUARE)
    rep = verify_net(net, unit_square(), trials=5, seed=3)
    blob = rep.to_json()
    assert set(blob) == {"trials", "passes", "failures", "worst_margin",
                         "failed_rotations"}


def test_net_requires_matching_dimension():
    net = build_net_2d(unit_square(), EPS_SQUARE)
    cube = VPolytope(np.array([[x, y, z] for x in (0, 1) for y in (0, 1)
                               for z in (0, 1)], dtype=float))
    with pytest.raises(ValueError):
        verify_net(net, cube, trials=1)
