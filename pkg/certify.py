"""Maximality certificates for finite quasimonotone operators.

Claims about T^nu quantify over all of X or X*, so most of them can only be
checked on a finite Grid. A found witness is always reported with the data
needed to replay it; the absence of a witness is only ever
CONSISTENT_ON_GRID.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from cones import DD_MAX_DIM, cone_direction_witness, cone_equal, hcone_extreme_rays, vcone_member
from operators import (
    Pair, conic_hull, is_quasimonotone, make_pair, pair_to_json, perturb,
    polar_fiber, polar_member, qm_related,
)
from scalar_lp import (
    EXACT, DimensionMismatch, EmptyInput, QpolarError, dot, format_scalar, is_zero_vector, sub, vector,
)

logger = logging.getLogger(__name__)


# --- Exceptions ---

class NotQuasimonotone(QpolarError):
    """Raised when a certifier is handed an operator that is not quasimonotone."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"operator is not quasimonotone: {witness[0]} and {witness[1]} violate")


# --- Grids ---

@dataclass(frozen=True)
class Grid:
    """Finite scaffold: base points to search and covectors to try at each."""
    dim: int
    base_points: tuple
    probe_covectors: tuple

    def __post_init__(self):
        if not self.base_points:
            raise EmptyInput("a grid needs at least one base point")
        for v in self.base_points + self.probe_covectors:
            if len(v) != self.dim:
                raise DimensionMismatch(f"grid vector of dimension {len(v)}, expected {self.dim}")

    def to_json(self):
        return {
            "dim": self.dim,
            "base_points": [[format_scalar(a) for a in x] for x in self.base_points],
            "probe_covectors": [[format_scalar(a) for a in v] for v in self.probe_covectors],
        }

    def digest(self):
        blob = json.dumps(self.to_json(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def translated(self, x0):
        shifted = tuple(tuple(a + b for a, b in zip(x, x0)) for x in self.base_points)
        return Grid(self.dim, shifted, self.probe_covectors)


def unit_probes(dim, field=EXACT):
    probes = []
    for i in range(dim):
        e = tuple(1 if j == i else 0 for j in range(dim))
        probes.append(vector(e, field))
        probes.append(vector(tuple(-a for a in e), field))
    return tuple(probes)


def make_grid(dim, base_points, probe_covectors=None, field=EXACT):
    """Coerce and deduplicate base points, keeping their order."""
    points = []
    for x in base_points:
        x = vector(x, field)
        if x not in points:
            points.append(x)
    if probe_covectors is None:
        probes = unit_probes(dim, field)
    else:
        probes = tuple(vector(v, field) for v in probe_covectors)
    return Grid(dim, tuple(points), probes)


def _diameter(points, f):
    """Euclidean diameter of a point set; exact when rational, else an integer upper bound."""
    d2 = max(dot(sub(a, b), sub(a, b)) for a in points for b in points)
    if f.mode == "float":
        return math.sqrt(d2)
    d2 = Fraction(d2)
    num, den = math.isqrt(d2.numerator), math.isqrt(d2.denominator)
    if num * num == d2.numerator and den * den == d2.denominator:
        return f.coerce(Fraction(num, den))
    return math.isqrt(math.ceil(d2)) + 1


def default_grid(T):
    """Base points, pairwise midpoints and a margin of one diameter.

    Points are ordered outward from the centre of the bounding box; ties go
    to the lexicographically larger point.
    """
    f = T.field
    dom = T.dom() or [vector([0] * T.dim, f)]
    lo = [min(x[k] for x in dom) for k in range(T.dim)]
    hi = [max(x[k] for x in dom) for k in range(T.dim)]
    center = tuple(f.div(a + b, 2) for a, b in zip(lo, hi))
    diam = _diameter(dom, f)
    if f.is_zero(diam):
        diam = f.coerce(1)
    points = list(dom)
    for i in range(len(dom)):
        for j in range(i + 1, len(dom)):
            points.append(tuple(f.div(a + b, 2) for a, b in zip(dom[i], dom[j])))
    for k in range(T.dim):
        for end in (lo[k] - diam, hi[k] + diam):
            points.append(tuple(end if j == k else center[j] for j in range(T.dim)))

    def outward(x):
        d = sub(x, center)
        return (dot(d, d), tuple(-a for a in x))

    unique = sorted(set(points), key=outward)
    return make_grid(T.dim, unique, None, f)


# --- Certificates ---

class Verdict(Enum):
    REFUTED_WITH_WITNESS = "refuted_with_witness"
    CONSISTENT_ON_GRID = "consistent_on_grid"
    EXACTLY_TRUE = "exactly_true"
    EXACTLY_FALSE = "exactly_false"


@dataclass(frozen=True)
class Certificate:
    """A verdict on one claim, with its witness and the grid it was run on."""
    claim: str
    verdict: Verdict
    witness: tuple = None
    grid_digest: str = None
    detail: dict = field(default_factory=dict)

    @property
    def refutes(self):
        return self.verdict in (Verdict.REFUTED_WITH_WITNESS, Verdict.EXACTLY_FALSE)

    def to_json(self):
        return {
            "claim": self.claim,
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else [pair_to_json(p) for p in self.witness],
            "grid_digest": self.grid_digest,
            "detail": self.detail,
        }


def _require_quasimonotone(T):
    check = is_quasimonotone(T)
    if not check:
        raise NotQuasimonotone(check.witness)


def _consistent(claim, grid):
    return Certificate(claim, Verdict.CONSISTENT_ON_GRID, None, grid.digest(), {
        "base_points": len(grid.base_points),
        "probe_covectors": len(grid.probe_covectors),
    })


def _found(claim, verdict, witness, grid):
    logger.debug("%s refuted by %s", claim, witness)
    return Certificate(claim, verdict, tuple(witness), grid.digest())


# --- Certifiers ---

def certify_maximal(T, grid):
    """Look for p outside T with p in T^nu; T u {p} is then a larger
    quasimonotone operator, so one witness settles the claim exactly.

    Nonzero covectors are tried on the whole grid first. X x {0} lies in
    every polar, so a base point without (x, 0) in T is the fallback witness.
    """
    _require_quasimonotone(T)
    for x in grid.base_points:
        candidates = set(grid.probe_covectors)
        if T.dim <= DD_MAX_DIM:
            rays = hcone_extreme_rays(polar_fiber(T, x)).generators
            candidates.update(vector(r, T.field) for r in rays)
        hits = sorted(v for v in candidates
                      if not is_zero_vector(v, T.field)
                      and Pair(x, v) not in T and polar_member(T, Pair(x, v)))
        if hits:
            return _found("maximal", Verdict.EXACTLY_FALSE, [Pair(x, hits[0])], grid)
    zero = vector([0] * T.dim, T.field)
    for x in grid.base_points:
        if Pair(x, zero) not in T:
            return _found("maximal", Verdict.EXACTLY_FALSE, [Pair(x, zero)], grid)
    return _consistent("maximal", grid)


def certify_premaximal(T, grid):
    """Search T^nu for a quasimonotonicity violation between two grid fibres."""
    _require_quasimonotone(T)
    fibers = {x: polar_fiber(T, x) for x in grid.base_points}
    points = grid.base_points
    for i, x in enumerate(points):
        for y in points[i + 1:]:
            v = cone_direction_witness(fibers[x], sub(y, x))
            if v is None:
                continue
            w = cone_direction_witness(fibers[y], sub(x, y))
            if w is not None:
                return _found("premaximal", Verdict.REFUTED_WITH_WITNESS, [Pair(x, v), Pair(y, w)], grid)
    return _consistent("premaximal", grid)


def certify_ae_maximal(T, grid):
    """Compare the conic hull with zero section against T^nu fibre by fibre."""
    _require_quasimonotone(T)
    hull = conic_hull(T, with_zero_section=True)
    for x in grid.base_points:
        check = hull.fiber(x)
        fiber = polar_fiber(T, x)
        if cone_equal(fiber, check):
            continue
        rays = hcone_extreme_rays(fiber).generators
        gap = sorted(vector(r, T.field) for r in rays if not vcone_member(check, r))
        if gap:
            return _found("ae_maximal", Verdict.EXACTLY_FALSE, [Pair(x, gap[0])], grid)
    return _consistent("ae_maximal", grid)


def bipolar_member_falsify(T, p, grid):
    """Search grid-sampled elements of T^nu for one not ~q-related to p."""
    p = make_pair(p.x, p.xstar, T.field)
    f = T.field
    for y in grid.base_points:
        if not f.is_pos(dot(sub(y, p.x), p.xstar)):
            continue
        w = cone_direction_witness(polar_fiber(T, y), sub(p.x, y))
        if w is not None:
            return _found("bipolar_member", Verdict.REFUTED_WITH_WITNESS, [p, Pair(y, w)], grid)
    return _consistent("bipolar_member", grid)


def certify_perturbations(T, alphas, grid):
    """Pre-maximality of T + alpha* for each alpha* in a finite list.

    A non-quasimonotone perturbation refutes directly with its violating pair.
    """
    results = []
    for alpha in alphas:
        S = perturb(T, alpha)
        check = is_quasimonotone(S)
        if not check:
            results.append((S, _found("premaximal", Verdict.REFUTED_WITH_WITNESS, check.witness, grid)))
        else:
            results.append((S, certify_premaximal(S, grid)))
    return results


# --- Replay ---

def replay_certificate(T, cert):
    """Re-verify a refuting certificate by direct relation evaluation."""
    if not cert.refutes:
        return True
    f = T.field
    w = cert.witness
    if cert.claim == "maximal":
        p = w[0]
        return p not in T and bool(polar_member(T, p)) and bool(is_quasimonotone(T.with_pair(p)))
    if cert.claim == "ae_maximal":
        p = w[0]
        hull = conic_hull(T, with_zero_section=True)
        return bool(polar_member(T, p)) and not vcone_member(hull.fiber(p.x), p.xstar)
    if cert.claim == "premaximal":
        p, q = w
        if not (polar_member(T, p) and polar_member(T, q)):
            # perturbation refutations carry a violating pair of the operator itself
            return p in T and q in T and not qm_related(p, q, f)
        return not qm_related(p, q, f)
    if cert.claim == "bipolar_member":
        p, q = w
        return bool(polar_member(T, q)) and not qm_related(p, q, f)
    raise ValueError(f"unknown claim: {cert.claim!r}")
