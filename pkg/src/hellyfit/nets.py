"""Finite rotation nets.

A net for a body K at accuracy eps is a finite list of rotations A_1..A_t
such that every rotated copy of K contains a translate of (1-eps)A_iK for
some i.  Equivalently, for every rotation D there is a net element within
the body's rotational slack: a shrunk copy at the relative rotation still
fits inside K.

Two builders are provided.  The planar one measures the slack angle of K
directly (`max_angle_2d`) and spaces rotations accordingly; it produces the
smallest nets this module knows how to certify.  The general builder uses
only the inradius/circumradius ratio and covers the rotation group at
operator-norm resolution eps*r/R, which is sufficient for any convex body
but typically far from tight.  Neither builder exploits symmetries of K:
a square gets four rotations even though one would do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DegenerateGeometryError,
    Rotation,
    UnsupportedDimensionError,
    VPolytope,
    miniball,
    random_rotation,
    shape_digest,
)
from .lp import (
    LpInstance,
    beta_fixed_rotation,
    chebyshev_inradius,
    fit_check,
    seidel_lp,
)

TOUCH_TOL = 1e-9       # a fit margin this small counts as a boundary contact
FAIL_TOL = 1e-7        # margins below -FAIL_TOL are proper failures
ANGLE_TOL = 1e-3       # default scan resolution for max_angle_2d
CEIL_SLACK = 1e-6      # protects t = ceil(pi/alpha) from fp noise in alpha

EXACT_2D = "exact_2d"
SUFFICIENT_BOUND = "sufficient_bound"
VERIFIED_SAMPLING = "verified_sampling"

_CERTIFICATES = (EXACT_2D, SUFFICIENT_BOUND, VERIFIED_SAMPLING)


@dataclass(eq=False)
class RotationNet:
    """Immutable list of rotations with the accuracy they were built for."""

    rotations: tuple
    epsilon: float
    shape_hash: str
    certificate: str

    def __post_init__(self):
        if len(self.rotations) < 1:
            raise ValueError("a net needs at least one rotation")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.certificate not in _CERTIFICATES:
            raise ValueError(f"unknown certificate {self.certificate!r}")
        self.rotations = tuple(self.rotations)

    def __len__(self):
        return len(self.rotations)

    def __iter__(self):
        return iter(self.rotations)

    @property
    def dim(self):
        return self.rotations[0].dim

    def angles(self):
        if self.dim != 2:
            raise UnsupportedDimensionError("angles are only defined for 2-d nets")
        return np.array([r.angle for r in self.rotations])

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "certificate": self.certificate,
            "rotations": [r.matrix.reshape(-1).tolist() for r in self.rotations],
        }

    @classmethod
    def from_json(cls, obj, shape_hash=""):
        rots = []
        for flat in obj["rotations"]:
            flat = np.asarray(flat, dtype=float)
            d = round(math.isqrt(flat.size))
            if d * d != flat.size:
                raise ValueError("rotation entry is not a square matrix")
            rots.append(Rotation(flat.reshape(d, d)))
        return cls(tuple(rots), float(obj["epsilon"]), shape_hash,
                   str(obj["certificate"]))


# ---------------------------------------------------------------------------
# planar slack angle


def _margin_fn(K: VPolytope, epsilon: float):
    """Fit margin as a function of the rotation angle.

    Uses the support-function form of the scale LP: for alpha >= 0 the
    vertex constraint rows of one facet are all dominated by the row built
    from max_j <u_i, A v_j>, so |P| + 1 rows decide the same optimum as the
    full |P|*|K| matrix.  The equivalence is pinned by a test against
    beta_fixed_rotation.
    """
    PK = K.hull_halfspaces()
    target = 1.0 - epsilon
    U, off = PK.normals, PK.offsets
    V = K.vertices
    n, d = U.shape
    alpha_row = np.zeros(d + 1)
    alpha_row[d] = -1.0

    def margin(theta):
        A = Rotation.from_angle(theta)
        support = np.max(U @ (V @ A.matrix.T).T, axis=1)
        rows = np.vstack([np.hstack([U, support[:, None]]), alpha_row])
        inst = LpInstance.maximize_last(rows, np.concatenate([off, [0.0]]))
        res = seidel_lp(inst)
        if res.status != "optimal":
            return -1.0
        return res.value - target

    return margin


def _parabola_refine(margin, center, h=1e-4, rounds=3, max_step=None):
    """Locate a smooth local minimum by repeated 3-point parabola fits.

    The true minimum may sit up to a grid cell away from `center`, so the
    per-round step is clipped at `max_step` (defaults to the sample width).
    """
    clip = h if max_step is None else max_step
    v = center
    for _ in range(rounds):
        m_l, m_c, m_r = margin(v - h), margin(v), margin(v + h)
        denom = m_l - 2.0 * m_c + m_r
        if denom <= 0.0:
            break
        step = 0.5 * h * (m_l - m_r) / denom
        v += float(np.clip(step, -clip, clip))
    return v, margin(v)


def _cross_boundary(margin, lo, hi, tol=1e-9):
    """Bisect for the edge of {margin > TOUCH_TOL}; lo is clean, hi is not."""
    for _ in range(64):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if margin(mid) > TOUCH_TOL:
            lo = mid
        else:
            hi = mid
    return hi


def _first_stop(margin, sign, tol):
    """Smallest positive angle along one direction where the shrunk copy
    stops fitting strictly (failure or boundary contact); pi if none."""
    n_steps = int(math.ceil(math.pi / tol))
    thetas = [k * tol for k in range(1, n_steps)] + [math.pi]
    prev_t = 0.0
    window = [(0.0, margin(0.0))]  # trailing (theta, margin) for local minima
    for t in thetas:
        m = margin(sign * t)
        if m <= TOUCH_TOL:
            if m < -FAIL_TOL:
                return _cross_boundary(lambda x: margin(sign * x), prev_t, t)
            v, mv = _parabola_refine(lambda x: margin(sign * x), t, max_step=tol)
            return max(0.0, v)
        window.append((t, m))
        if len(window) == 3:
            (t0, m0), (t1, m1), (t2, m2) = window
            if m1 <= m0 and m1 <= m2:
                v, mv = _parabola_refine(lambda x: margin(sign * x), t1, max_step=tol)
                if mv <= TOUCH_TOL:
                    if mv < -FAIL_TOL:
                        return _cross_boundary(lambda x: margin(sign * x), t0, v)
                    return max(0.0, v)
            window.pop(0)
        prev_t = t
    return math.pi


def max_angle_2d(K: VPolytope, epsilon: float, tol: float = ANGLE_TOL) -> float:
    """Largest alpha such that (1-eps)R_theta K fits in K for all |theta| <= alpha.

    Scans a theta grid at resolution `tol` in both directions (fit slack is
    not symmetric for bodies without mirror symmetry), refines grid local
    minima by parabola fitting to catch contacts between grid points, and
    bisects proper failures.  Capped at pi, which means every rotation fits.
    """
    if K.dim != 2:
        raise UnsupportedDimensionError("max_angle_2d is planar only")
    if not (0.0 <= epsilon < 1.0):
        raise ValueError("epsilon must lie in [0, 1)")
    if not K.is_full_dimensional():
        raise DegenerateGeometryError("body must be full-dimensional")
    if tol <= 0:
        raise ValueError("tol must be positive")
    margin = _margin_fn(K, epsilon)
    if margin(0.0) <= TOUCH_TOL:
        return 0.0
    a_pos = _first_stop(margin, +1.0, tol)
    a_neg = _first_stop(margin, -1.0, tol)
    return min(a_pos, a_neg, math.pi)


def build_net_2d(K: VPolytope, epsilon: float, tol: float = ANGLE_TOL) -> RotationNet:
    """Uniform planar net with spacing set by the measured slack angle.

    t = ceil(pi / alpha) rotations at angles 2*pi*j/t, j = 1..t.  The ceiling
    is taken with a small slack because alpha itself is resolved numerically;
    a direct fit probe at the worst-case relative angle then confirms the
    spacing (and densifies as a last resort, which no known input triggers).
    """
    if K.dim != 2:
        raise UnsupportedDimensionError("build_net_2d is planar only")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    alpha = max_angle_2d(K, epsilon, tol)
    if alpha <= 0.0:
        raise DegenerateGeometryError(
            "body has no rotational slack at this epsilon; increase epsilon")
    t = max(1, int(math.ceil(math.pi / alpha - CEIL_SLACK)))
    PK = K.hull_halfspaces()
    target = 1.0 - epsilon
    for _ in range(3):
        if fit_check(K, Rotation.from_angle(math.pi / t), target, PK) and \
           fit_check(K, Rotation.from_angle(-math.pi / t), target, PK):
            break
        t += 1
    rots = tuple(Rotation.from_angle(2.0 * math.pi * j / t) for j in range(1, t + 1))
    return RotationNet(rots, epsilon, shape_digest(K), EXACT_2D)


# ---------------------------------------------------------------------------
# radius-ratio builder, any supported dimension


def _euler_zyz(p1, p2, p3):
    c1, s1 = math.cos(p1), math.sin(p1)
    c2, s2 = math.cos(p2), math.sin(p2)
    c3, s3 = math.cos(p3), math.sin(p3)
    rz1 = np.array([[c1, -s1, 0.0], [s1, c1, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[c2, 0.0, s2], [0.0, 1.0, 0.0], [-s2, 0.0, c2]])
    rz3 = np.array([[c3, -s3, 0.0], [s3, c3, 0.0], [0.0, 0.0, 1.0]])
    return rz1 @ ry @ rz3


def build_net_sufficient(K: VPolytope, epsilon: float, d: int | None = None) -> RotationNet:
    """Net from the inradius/circumradius ratio alone.

    If B(c, r) lies in K and K lies in B(c, R), then K contains
    (1-eps)K + eps*B(c, r) by convexity, so perturbing the rotation by at
    most eps*r/R in operator norm keeps a translate of the shrunk copy
    inside.  The grid is spaced so every rotation has a net element within
    that operator-norm radius; a sampled spot check confirms both the
    covering distance and the actual fit before the net is returned.
    """
    if d is None:
        d = K.dim
    if d != K.dim:
        raise ValueError("requested dimension disagrees with the body")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if d not in (2, 3):
        raise UnsupportedDimensionError(
            "radius-ratio nets are implemented for d = 2 and d = 3 only")
    PK = K.hull_halfspaces()
    inr = chebyshev_inradius(PK)
    if inr.status != "optimal" or inr.radius <= 0.0:
        raise DegenerateGeometryError("body has empty interior")
    r = inr.radius
    R = miniball(K.vertices).radius
    rho = min(1.0, epsilon * r / R)

    if d == 2:
        t = int(math.ceil(math.pi / math.asin(rho / 2.0)))
        rots = tuple(Rotation.from_angle(2.0 * math.pi * j / t)
                     for j in range(1, t + 1))
    else:
        s = 4.0 * math.asin(min(1.0, rho / 6.0))
        n1 = int(math.ceil(2.0 * math.pi / s))
        n2 = int(math.ceil(math.pi / s)) + 1
        mats = []
        for p1 in 2.0 * math.pi * np.arange(n1) / n1:
            for p2 in np.linspace(0.0, math.pi, n2):
                for p3 in 2.0 * math.pi * np.arange(n1) / n1:
                    mats.append(_euler_zyz(p1, p2, p3))
        rots = tuple(Rotation(m) for m in mats)

    net = RotationNet(rots, epsilon, shape_digest(K), SUFFICIENT_BOUND)
    mats = np.stack([rot.matrix for rot in net.rotations])
    target = 1.0 - epsilon
    for trial in range(20):
        D = random_rotation(d, seed=trial)
        frob = np.linalg.norm(mats - D.matrix, axis=(1, 2))
        # ||.||_op <= ||.||_F <= sqrt(d) ||.||_op, so every element within
        # operator distance rho sits in this candidate slice
        cand = np.nonzero(frob <= math.sqrt(d) * rho + 1e-9)[0]
        if cand.size == 0:
            raise RuntimeError("covering radius check failed; spacing bound is wrong")
        ops = [np.linalg.norm(mats[j] - D.matrix, ord=2) for j in cand]
        j = int(cand[int(np.argmin(ops))])
        if min(ops) > rho + 1e-9:
            raise RuntimeError("covering radius check failed; spacing bound is wrong")
        rel = D.inverse().compose(net.rotations[j])
        if not fit_check(K, rel, target, PK):
            raise RuntimeError("spacing bound did not certify a fit; bound is wrong")
    return net


# ---------------------------------------------------------------------------
# sampling verification


@dataclass(eq=False)
class NetReport:
    """Outcome of spot-checking the net property on sampled rotations."""

    trials: int
    passes: int
    failures: int
    worst_margin: float
    failed_rotations: tuple

    @property
    def ok(self):
        return self.failures == 0

    def to_json(self):
        return {
            "trials": self.trials,
            "passes": self.passes,
            "failures": self.failures,
            "worst_margin": self.worst_margin,
            "failed_rotations": [m.reshape(-1).tolist() for m in self.failed_rotations],
        }


def verify_net(net: RotationNet, K: VPolytope, trials: int = 100, seed: int = 0,
               rotations=None) -> NetReport:
    """Check that sampled rotated copies of K contain a shrunk net copy.

    For each test rotation D (Haar samples, or the explicit `rotations` if
    given), find a net element A_i such that a translate of (1-eps)A_iK
    fits inside DK.  Net elements are tried nearest-first, so sound nets
    cost one fit probe per trial.  Never raises: the report carries the
    pass/fail counts, the worst fit margin seen, and the failing rotations.
    """
    if net.dim != K.dim:
        raise ValueError("net and body disagree on dimension")
    PK = K.hull_halfspaces()
    target = 1.0 - net.epsilon
    if rotations is not None:
        tests = [r if isinstance(r, Rotation) else Rotation(np.asarray(r, dtype=float))
                 for r in rotations]
    else:
        tests = [random_rotation(K.dim, seed=int(s))
                 for s in np.random.SeedSequence(seed).generate_state(trials)]
    mats = np.stack([rot.matrix for rot in net.rotations])
    passes = 0
    failed = []
    worst = math.inf
    for D in tests:
        order = np.argsort(np.linalg.norm(mats - D.matrix, axis=(1, 2)))
        trial_best = -math.inf
        hit = False
        for j in order:
            rel = D.inverse().compose(net.rotations[int(j)])
            res = beta_fixed_rotation(K, rel, PK, canonical=False)
            m = (res.value - target) if res.ok else -1.0
            trial_best = max(trial_best, m)
            if m >= -1e-9:
                hit = True
                break
        worst = min(worst, trial_best)
        if hit:
            passes += 1
        else:
            failed.append(D.matrix)
    return NetReport(len(tests), passes, len(tests) - passes, worst, tuple(failed))
