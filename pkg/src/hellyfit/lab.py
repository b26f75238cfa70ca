"""Planar bodies and searches showing that few constraints never suffice.

The star object is a cap body: the unit circle with one arc cut away and the
hole bridged by a chord.  Against a family of half-planes tangent to the unit
circle, every small subfamily leaves room to rotate, nudge and strictly
inflate the body, while the full family pins it at scale one.  The routines
here build such bodies, find the inflating placements, and assemble the whole
demonstration into a machine-checkable verdict.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import (
    Cap,
    CircleArcs,
    HPolytope,
    Placement,
    Rotation,
    VPolytope,
    cap_measure_2d,
    shape_digest,
)
from .lp import (
    UNBOUNDED,
    beta_fixed_rotation,
    fit_check,
)
from .nets import build_net_2d
from .solver import beta_direct

TWO_PI = 2.0 * math.pi
INFLATION_BUDGET = 1e6   # scale cap when a subfamily cannot bound the copy
DEMO_NET_EPS = 0.05      # net accuracy for the full-family fit in the demo
SUBSET_CAP = 10 ** 4     # exhaustive subset check limit, else sampled
MEASURE_TOL = 1e-12


class SearchFailure(RuntimeError):
    """A randomized search ran out of budget; carries what was seen."""

    def __init__(self, message, tries=0, best=None):
        super().__init__(message)
        self.tries = tries
        self.best = best


@dataclass(eq=False)
class CapBody(VPolytope):
    """Convex hull of the unit circle minus one open arc.

    The removed arc is centered at `removed_center_angle` with angular width
    `removed_width`; what remains of the circle is discretized into vertices
    (arc endpoints included), so the body is a polygon inscribed in the unit
    disk whose flat side is the chord across the hole.
    """

    removed_center_angle: float = 0.0
    removed_width: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        self.removed_center_angle = float(self.removed_center_angle)
        self.removed_width = float(self.removed_width)
        if not 0.0 < self.removed_width < TWO_PI:
            raise ValueError("removed arc width must lie strictly in (0, 2*pi)")

    @property
    def boundary_arcs(self):
        """The retained circular arc; this is the body's share of the circle."""
        half = 0.5 * self.removed_width
        start = self.removed_center_angle + half
        return CircleArcs(((start, start + TWO_PI - self.removed_width),))

    @property
    def retained_measure(self):
        return (TWO_PI - self.removed_width) / TWO_PI

    def to_json(self):
        return {
            "dim": 2,
            "arc_body": {
                "removed_center_angle": self.removed_center_angle,
                "removed_width": self.removed_width,
                "vertex_count": len(self),
            },
        }

    @classmethod
    def from_json(cls, obj):
        data = obj["arc_body"]
        # vertex_count is our own round-trip extra; plain descriptions get
        # the default discretization
        m = int(data.get("vertex_count", 130)) - 2
        return cls.of_width(data["removed_center_angle"],
                            data["removed_width"], m)

    @classmethod
    def of_width(cls, center, width, m: int = 128):
        """Direct construction from the removed arc's center and width."""
        return _discretized_cap_body(float(center), float(width), int(m))


def _discretized_cap_body(center, width, m):
    half = 0.5 * width
    angles = np.linspace(center + half, center + TWO_PI - half, m + 2)
    pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return CapBody(pts, center, width)


def cap_body(n: int, margin: float, m: int = 128) -> CapBody:
    """Cap body tuned against families of n half-planes.

    The removed width is pi - 2*pi/n + margin, which makes the retained
    arc's overlap with any half-circle around the hole measure strictly
    less than 1/n; that overlap bound is re-checked exactly before the
    body is returned.
    """
    if n < 2:
        raise ValueError("need n >= 2 half-spaces to play against")
    if m < 1:
        raise ValueError("need at least one interior vertex on the arc")
    width = math.pi - TWO_PI / n + margin
    if not 0.0 < margin < TWO_PI / n:
        raise ValueError("margin must lie in (0, 2*pi/n) so the arc stays long")
    if width >= TWO_PI:
        raise ValueError("removed width reaches the whole circle")
    body = _discretized_cap_body(0.0, width, m)
    hole = Cap(np.array([math.cos(0.0), math.sin(0.0)]), 0.0)
    overlap = cap_measure_2d(body, hole)
    if overlap >= 1.0 / n - MEASURE_TOL:
        raise ValueError(
            f"retained arc meets the half-circle in measure {overlap}, "
            f"not below 1/{n}")
    return body


@dataclass(eq=False)
class TangentFamily:
    """Half-planes tangent to the unit circle at given contact directions."""

    contact_points: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.contact_points, dtype=float))
        if U.shape[1] != 2 or U.shape[0] == 0:
            raise ValueError("contact points must form a nonempty (n, 2) array")
        norms = np.linalg.norm(U, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("contact points must sit on the unit circle")
        self.contact_points = U

    def __len__(self):
        return self.contact_points.shape[0]

    @property
    def halfspaces(self) -> HPolytope:
        return HPolytope(self.contact_points.copy(),
                         np.ones(len(self)))

    @property
    def angles(self):
        return np.arctan2(self.contact_points[:, 1], self.contact_points[:, 0])

    def take(self, indices):
        return TangentFamily(self.contact_points[np.asarray(indices, dtype=int)])

    @classmethod
    def at_angles(cls, angles):
        a = np.asarray(angles, dtype=float)
        return cls(np.stack([np.cos(a), np.sin(a)], axis=1))


def _avoiding_angle(arcs: CircleArcs, points, max_tries, rng):
    """Uniform random angles until the rotated arcs clear every point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best = 0.0
    for t in range(1, max_tries + 1):
        theta = float(rng.uniform(0.0, TWO_PI))
        moved = arcs.rotated(theta)
        dist = min(moved.chord_distance(p) for p in pts)
        best = max(best, dist)
        if dist > 0.0:
            return theta, dist, t
    raise SearchFailure(
        f"no clearing rotation in {max_tries} tries (best distance {best})",
        tries=max_tries, best=best)


def avoid_rotation(K, points, max_tries: int = 64, seed=0):
    """Rotation putting every given unit point off K's circular part.

    Returns (rotation, distance): the minimum Euclidean distance from the
    points to the rotated arc is `distance` > 0.  Success per uniform try
    has probability at least 1 - n * mu, where mu is the measure of K's
    circular part, so that measure must be below 1/n to start with; a
    spent budget raises rather than returning silently.
    """
    arcs = getattr(K, "boundary_arcs", None)
    if arcs is None:
        arcs = CircleArcs(())
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    mu = arcs.measure()
    if n * mu >= 1.0:
        raise ValueError(
            f"circular part has measure {mu}, too big against {n} points")
    rng = np.random.default_rng(seed)
    theta, dist, _ = _avoiding_angle(arcs, pts, max_tries, rng)
    return Rotation.from_angle(theta), dist


def _largest_gap_direction(arcs: CircleArcs):
    """Midpoint angle of the widest hole in the arc set."""
    if not arcs.arcs:
        return 0.0
    spans = sorted((a % TWO_PI, (a % TWO_PI) + (b - a)) for a, b in arcs.arcs)
    best_gap, best_mid = -1.0, 0.0
    for (a1, b1), (a2, _) in zip(spans, spans[1:] + [(spans[0][0] + TWO_PI,
                                                      spans[0][1] + TWO_PI)]):
        gap = a2 - b1
        if gap > best_gap:
            best_gap, best_mid = gap, 0.5 * (b1 + a2)
    return best_mid % TWO_PI


def _boxed_scale_placement(K, rotation, P, budget, seed):
    """Best placement when the plain fit reports an unbounded ray.

    A subfamily whose normals leave a translation direction free makes the
    fit LP recede even when the scale itself stays finite (two opposite
    tangents pin the scale but let the copy slide along their strip), so the
    plain solve cannot tell a huge optimum from a merely degenerate one.
    Boxing the container at twice the budget restores boundedness without
    touching any optimum below the budget; the scale that comes back
    separates the two cases.
    """
    box = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    boxed = HPolytope(np.vstack([P.normals, box]),
                      np.concatenate([P.offsets, np.full(4, 2.0 * budget)]))
    res = beta_fixed_rotation(K, rotation, boxed, seed=seed)
    if not res.ok:
        raise SearchFailure(f"boxed fit ended {res.status}")
    return res.value, res.placement


@dataclass(eq=False)
class InflationResult:
    """Inflated placement of a body inside a tangent subfamily.

    Iterating yields (delta2, placement) so callers can unpack the pair;
    `capped` marks subfamilies that cannot bound the scale at all, where
    delta2 is reported at the search budget instead of infinity.
    """

    delta2: float
    placement: Placement
    rotation_tries: int
    epsilon1: float
    capped: bool = False

    def __iter__(self):
        return iter((self.delta2, self.placement))


def inflation_search(K, family: TangentFamily, seed=0,
                     max_tries: int = 4096, attempts: int = 8) -> InflationResult:
    """Placement of K strictly inflated inside a tangent subfamily.

    Follows the rotate-then-translate-then-optimize recipe: shrink a
    slacked half-circle around the body's hole until the arc inside it
    measures below 1/n, rotate so that restricted arc clears every contact
    point, nudge the body toward the hole, then let an LP pick the best
    translation and scale at that rotation.  The result is certified by an
    independent fit check before being returned; a certified scale above 1
    is never claimed otherwise.
    """
    n = len(family)
    arcs = getattr(K, "boundary_arcs", None) or CircleArcs(())
    u_angle = _largest_gap_direction(arcs)
    u = np.array([math.cos(u_angle), math.sin(u_angle)])

    eps1 = 0.1
    while cap_measure_2d(K, Cap(u, eps1)) >= 1.0 / n:
        eps1 *= 0.5
        if eps1 < 1e-12:
            raise SearchFailure(
                "no slacked half-circle around the hole is thin enough; "
                f"the arc near {u_angle} is too long against n={n}")
    near_hole = arcs.restrict_to_cap(Cap(u, eps1))

    P = family.halfspaces
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(attempts):
        theta, dist, tries = _avoiding_angle(near_hole, family.contact_points,
                                             max_tries, rng)
        rotation = Rotation.from_angle(theta)
        lp_seed = int(rng.integers(2 ** 31))
        res = beta_fixed_rotation(K, rotation, P, seed=lp_seed, canonical=False)
        if res.status == UNBOUNDED:
            value, placement = _boxed_scale_placement(K, rotation, P,
                                                      INFLATION_BUDGET, lp_seed)
            if value >= INFLATION_BUDGET:
                # the scale itself is unbounded; report it at the budget
                at_budget = Placement(placement.translation, INFLATION_BUDGET,
                                      rotation)
                if fit_check(K, rotation, at_budget.scale, P, seed=lp_seed):
                    return InflationResult(at_budget.scale - 1.0, at_budget,
                                           tries, eps1, capped=True)
                last = ("budget placement failed its fit check", value)
                continue
            # only a translation ray receded; the scale optimum is real
            if value > 1.0 and fit_check(K, rotation, value, P, seed=lp_seed):
                return InflationResult(value - 1.0, placement, tries, eps1)
            last = ("no inflation at this rotation", value, theta, dist)
            continue
        if res.ok and res.value > 1.0 and fit_check(K, rotation, res.value, P,
                                                    seed=lp_seed):
            # the nudge toward the hole is subsumed by the LP's translation;
            # report the optimized placement, not the warm start
            return InflationResult(res.value - 1.0, res.placement, tries, eps1)
        last = ("no inflation at this rotation", res.value, theta, dist)
    raise SearchFailure(f"inflation failed after {attempts} rotations: {last}")


def _subset_iter(sample_count, n, rng):
    total = math.comb(sample_count, n)
    if total <= SUBSET_CAP:
        yield from combinations(range(sample_count), n)
        return
    for _ in range(SUBSET_CAP):
        pick = np.sort(rng.choice(sample_count, size=n, replace=False))
        yield tuple(int(i) for i in pick)


_DEMO_NETS = {}


def _demo_net(K):
    """Fine rotation net for the full-family fit, cached per body shape."""
    key = (shape_digest(K), DEMO_NET_EPS)
    net = _DEMO_NETS.get(key)
    if net is None:
        net = build_net_2d(K, DEMO_NET_EPS)
        _DEMO_NETS[key] = net
    return net


def lower_bound_demo(n: int, sample_count: int, seed=0, m: int = 128) -> dict:
    """Every n-subfamily admits strict inflation; the full family does not.

    Builds the cap body tuned to n, spreads `sample_count` tangent
    half-planes around the circle with a seeded phase, then (a) certifies
    an inflated copy inside every checked n-subset and (b) fits the body
    against the whole family with a fine rotation net, expecting scale one.
    The two checks go through different code paths, and the verdict passes
    only when both hold.
    """
    if n < 2:
        raise ValueError("the demonstration needs n >= 2")
    if sample_count < n:
        raise ValueError("cannot draw n-subsets from fewer than n half-planes")
    root = int(seed) % (2 ** 63)
    rng = np.random.default_rng(np.random.SeedSequence([root, 0]))
    K = cap_body(n, margin=math.pi / (2 * n), m=m)
    phase = float(rng.uniform(0.0, TWO_PI))
    family = TangentFamily.at_angles(phase + TWO_PI * np.arange(sample_count)
                                     / sample_count)

    delta = math.inf
    checked = 0
    failing = None
    for subset in _subset_iter(sample_count, n, rng):
        sub_seed = np.random.SeedSequence([root, 1, *subset])
        try:
            result = inflation_search(K, family.take(subset),
                                      seed=int(sub_seed.generate_state(1)[0]))
        except SearchFailure:
            failing = list(subset)
            break
        checked += 1
        if result.delta2 <= 0.0:
            failing = list(subset)
            break
        delta = min(delta, result.delta2)

    net = _demo_net(K)
    full_beta = beta_direct(K, net, family.halfspaces, seed=root).beta
    subset_ok = failing is None and checked > 0 and delta > 0.0
    full_ok = full_beta <= 1.0 + 1e-3
    return {
        "n": int(n),
        "delta": None if math.isinf(delta) else float(delta),
        "subsets_checked": int(checked),
        "full_family_beta": float(full_beta),
        "verdict": "pass" if (subset_ok and full_ok) else "fail",
        "failing_subset": failing,
    }
