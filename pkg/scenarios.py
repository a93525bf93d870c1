"""Built-in scenarios: deterministic finite samples of the worked examples.

Each builder returns a Scenario carrying the sampled operator, the grid and
constraint set its claims are checked on, and a table of expectations that
verify_scenario replays.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from certify import (
    bipolar_member_falsify, certify_ae_maximal, certify_maximal, certify_premaximal,
    default_grid, make_grid, replay_certificate,
)
from cones import hcone_extreme_rays, polyhedron_classify
from mvip import ClaimViolation, ConstraintSet, minty_global, minty_solve, minty_solve_polar
from operators import (
    OperatorGraph, e_polyhedron, is_monotone, is_quasimonotone, make_pair, perturb,
    polar_fiber, polar_member,
)
from scalar_lp import EXACT, QpolarError, ScalarError, format_scalar, make_field

logger = logging.getLogger(__name__)


# --- Exceptions ---

class UnknownScenario(QpolarError, KeyError):
    """Raised for a scenario name that is not registered."""

    def __str__(self):
        return f"unknown scenario: {self.args[0]!r} (known: {', '.join(sorted(SCENARIOS))})"


class InvalidParams(QpolarError, ValueError):
    """Raised when scenario parameters are out of range or unknown."""
    pass


# --- Scenario Types ---

@dataclass(frozen=True)
class Expectation:
    """One row of a scenario's claim table.

    at is the point (or pair) a pointwise claim is evaluated at; grid
    overrides the scenario grid for this row only.
    """
    claim: str
    expected: object
    witness: tuple = None
    at: tuple = None
    grid: tuple = None


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict
    graph: OperatorGraph
    grid: object
    constraints: ConstraintSet = None
    expectations: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class Outcome:
    expectation: Expectation
    actual: object
    witness: tuple = None

    @property
    def ok(self):
        if self.actual != self.expectation.expected:
            return False
        return self.expectation.witness is None or self.witness == self.expectation.witness


# --- Parameter helpers ---

def _int_param(name, value, low, high=None):
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(str(value))
        except ValueError:
            raise InvalidParams(f"{name} must be an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        bound = f">= {low}" if high is None else f"in [{low}, {high}]"
        raise InvalidParams(f"{name} must be {bound}, got {value}")
    return value


def _exact(value, name):
    try:
        return EXACT.coerce(value)
    except ScalarError as e:
        raise InvalidParams(f"{name}: {e}")


def _half_steps(lo, hi, step):
    out = []
    v = Fraction(lo)
    while v <= hi:
        out.append((EXACT.coerce(v),))
        v += step
    return out


def _pairs(expected):
    """Expected witnesses are written as ((x, xstar), ...)."""
    return tuple(make_pair(x, xs) for x, xs in expected)


# --- Scenario builders ---

def build_x0(x=0):
    """{(x0, 0)}: its polar is all of X x X*."""
    x0 = (_exact(x, "x"),)
    T = OperatorGraph(1, [(x0, (0,))])
    far = (x0[0] + 3,)
    expectations = (
        Expectation("quasimonotone", True),
        Expectation("polar_member", True, at=(far, (-7,))),
        Expectation("polar_member", True, at=((x0[0] - 5,), (4,))),
        Expectation("maximal", "exactly_false", witness=_pairs([(x0, (-1,))])),
        Expectation("premaximal", "refuted_with_witness"),
        Expectation("e_set", "larger"),
    )
    return Scenario("x0", {"x": format_scalar(x0[0])}, T, default_grid(T), None, expectations)


def _circle_point(r, k, n):
    # Quarter turns land exactly on the axes
    if (4 * k) % n == 0:
        quarter = (4 * k) // n
        return [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)][quarter % 4]
    angle = 2 * math.pi * k / n
    return (r * math.cos(angle), r * math.sin(angle))


def default_radii(dim, n):
    """Radii 1/2 and 1, plus cos(2 pi / n)^2 in dim 2 once n >= 12.

    The extra circle puts its first off-axis samples inside the ball with
    diameter [0, e1], so the fibre at e1 narrows toward cone({e1}) as n grows.
    """
    if dim == 2 and n >= 12:
        return (0.5, math.cos(2 * math.pi / n) ** 2, 1.0)
    return (0.5, 1.0)


def build_identity(dim=2, n=8, radii=None, eps=1e-9):
    """The identity map sampled on concentric circles (dim 2) or at +-r (dim 1)."""
    dim = _int_param("dim", dim, 1, 2)
    n = _int_param("n", n, 1)
    if radii is None:
        radii = default_radii(dim, n)
    if isinstance(radii, (int, float, str)):
        radii = (radii,)
    try:
        radii = tuple(sorted({float(r) for r in radii}))
    except (TypeError, ValueError):
        raise InvalidParams(f"radii must be numbers, got {radii!r}")
    if not radii or any(not math.isfinite(r) or r <= 0 for r in radii):
        raise InvalidParams(f"radii must be positive and finite, got {radii!r}")
    try:
        f = make_field("float", eps)
    except ScalarError as e:
        raise InvalidParams(str(e))
    points = []
    for r in radii:
        if dim == 1:
            points.extend([(r,), (-r,)])
        else:
            points.extend(_circle_point(r, k, n) for k in range(n))
    T = OperatorGraph(dim, [(p, p) for p in points], f)
    expectations = [Expectation("quasimonotone", True), Expectation("monotone", True)]
    e1 = (1.0,) + (0.0,) * (dim - 1)
    minus = tuple(-a for a in e1)
    expectations.append(Expectation("polar_member", True, at=(e1, e1)))
    if len(radii) > 1 and 1.0 in radii:
        expectations.append(Expectation("polar_member", False, at=(e1, minus)))
        if dim == 2:
            expectations.append(Expectation("polar_member", False, at=(e1, (0.0, 1.0))))
    expectations.append(Expectation("e_set", "larger"))
    grid = make_grid(dim, [(0.0,) * dim] + list(T.dom()), None, f)
    params = {"dim": dim, "n": n, "radii": list(radii), "eps": f.eps}
    return Scenario("identity", params, T, grid, None, tuple(expectations))


def build_z_slice(m=2):
    """{-m..m} x {1}, a finite slice of Z x {1}."""
    m = _int_param("m", m, 1)
    T = OperatorGraph(1, [((k,), (1,)) for k in range(-m, m + 1)])
    half = Fraction(1, 2)
    premaximal_grid = tuple(_half_steps(-m - half, m + half, 1))
    expectations = (
        Expectation("quasimonotone", True),
        Expectation("polar_fiber", ((1,),), at=(half,)),
        Expectation("maximal", "exactly_false", witness=_pairs([((half,), (1,))])),
        Expectation("ae_maximal", "exactly_false", witness=_pairs([((half,), (1,))])),
        Expectation("premaximal", "consistent_on_grid", grid=premaximal_grid),
        Expectation("bipolar_member", "refuted_with_witness", at=((0,), (-1,))),
        Expectation("e_set", "larger"),
        Expectation("e_set_bounds", ((None, -m),)),
    )
    return Scenario("z-slice", {"m": m}, T, default_grid(T), None, expectations)


def _sign_graph(m):
    pairs = []
    for k in range(-m, m + 1):
        if k == 0:
            pairs.extend([((0,), (-1,)), ((0,), (1,))])
        else:
            pairs.append(((k,), (1 if k > 0 else -1,)))
    return OperatorGraph(1, pairs)


def build_sign(m=2):
    """x / |x| off zero and [-1, 1] at zero, the latter held by its two extreme covectors."""
    m = _int_param("m", m, 1)
    T = _sign_graph(m)
    expectations = (
        Expectation("quasimonotone", True),
        Expectation("ae_maximal", "consistent_on_grid"),
        Expectation("premaximal", "consistent_on_grid"),
    )
    grid = make_grid(1, T.dom())
    return Scenario("sign", {"m": m}, T, grid, None, expectations)


def build_sign_perturbed(m=2, alpha=1):
    """The sign sample shifted by a constant covector."""
    m = _int_param("m", m, 1)
    alpha = _exact(alpha, "alpha")
    T = perturb(_sign_graph(m), (alpha,))
    expectations = [Expectation("quasimonotone", True)]
    if alpha == 1:
        expectations.append(Expectation("ae_maximal", "exactly_false", witness=_pairs([((-m,), (-1,))])))
    grid = make_grid(1, T.dom())
    params = {"m": m, "alpha": format_scalar(alpha)}
    return Scenario("sign-perturbed", params, T, grid, None, tuple(expectations))


STEP_PAIRS = [
    ((-1,), (-1,)),
    ((Fraction(-1, 2),), (-2,)),
    ((0,), (5,)),
    ((0,), (-5,)),
    ((1,), (0,)),
    ((2,), (0,)),
]


def build_step():
    """(-inf, 0] for x < 0, R at 0 (sampled as +-5), {0} for x > 0."""
    T = OperatorGraph(1, STEP_PAIRS)
    grid = make_grid(1, _half_steps(-2, 2, Fraction(1, 2)))
    K = ConstraintSet(1, _half_steps(1, 2, Fraction(1, 4)))
    expectations = (
        Expectation("quasimonotone", True),
        Expectation("polar_member", True, at=((1,), (1,))),
        Expectation("polar_member", False, at=((1,), (-1,))),
        Expectation("premaximal", "consistent_on_grid"),
        Expectation("e_set", "singleton"),
        Expectation("e_set_point", (0,)),
        Expectation("minty", K.points),
        Expectation("minty_polar", ((1,),)),
        Expectation("minty_strict_inclusion", True),
        Expectation("minty_global_premaximal", "singleton"),
    )
    return Scenario("step", {}, T, grid, K, expectations)


SCENARIOS = {
    "x0": build_x0,
    "identity": build_identity,
    "z-slice": build_z_slice,
    "sign": build_sign,
    "sign-perturbed": build_sign_perturbed,
    "step": build_step,
}


def generate_scenario(name, **params):
    """Build a named scenario. The same parameters always give the same graph."""
    builder = SCENARIOS.get(name)
    if builder is None:
        raise UnknownScenario(name)
    try:
        scenario = builder(**params)
    except TypeError as e:
        raise InvalidParams(f"{name}: {e}")
    logger.debug("generated %s with %d pairs", name, len(scenario.graph))
    return scenario


# --- Claim checks ---

def _grid_for(s, e):
    if e.grid is None:
        return s.grid
    return make_grid(s.graph.dim, e.grid, None, s.graph.field)


def _certificate_check(certifier):
    def run(s, e):
        cert = certifier(s.graph, _grid_for(s, e))
        if cert.refutes and not replay_certificate(s.graph, cert):
            return "unreplayable", cert.witness
        return cert.verdict.value, cert.witness
    return run


def _check_bipolar(s, e):
    p = make_pair(e.at[0], e.at[1], s.graph.field)
    cert = bipolar_member_falsify(s.graph, p, _grid_for(s, e))
    if cert.refutes and not replay_certificate(s.graph, cert):
        return "unreplayable", cert.witness
    return cert.verdict.value, cert.witness


def _check_polar_member(s, e):
    p = make_pair(e.at[0], e.at[1], s.graph.field)
    return bool(polar_member(s.graph, p)), None


def _check_polar_fiber(s, e):
    fiber = polar_fiber(s.graph, e.at)
    return hcone_extreme_rays(fiber).generators, None


def _check_e_set(s, e):
    return polyhedron_classify(e_polyhedron(s.graph)).kind, None


def _check_e_set_point(s, e):
    return polyhedron_classify(e_polyhedron(s.graph)).point, None


def _check_e_set_bounds(s, e):
    return polyhedron_classify(e_polyhedron(s.graph)).bounds, None


def _check_minty(s, e):
    return tuple(minty_solve(s.graph, s.constraints)), None


def _check_minty_polar(s, e):
    return tuple(minty_solve_polar(s.graph, s.constraints)), None


def _check_strict_inclusion(s, e):
    direct = set(minty_solve(s.graph, s.constraints))
    polar = set(minty_solve_polar(s.graph, s.constraints))
    return polar < direct, None


def _check_minty_global(s, e):
    try:
        return minty_global(s.graph, _grid_for(s, e), premaximal=True).kind, None
    except ClaimViolation:
        return "claim_violation", None


CHECKS = {
    "quasimonotone": lambda s, e: (bool(is_quasimonotone(s.graph)), None),
    "monotone": lambda s, e: (bool(is_monotone(s.graph)), None),
    "maximal": _certificate_check(certify_maximal),
    "premaximal": _certificate_check(certify_premaximal),
    "ae_maximal": _certificate_check(certify_ae_maximal),
    "bipolar_member": _check_bipolar,
    "polar_member": _check_polar_member,
    "polar_fiber": _check_polar_fiber,
    "e_set": _check_e_set,
    "e_set_point": _check_e_set_point,
    "e_set_bounds": _check_e_set_bounds,
    "minty": _check_minty,
    "minty_polar": _check_minty_polar,
    "minty_strict_inclusion": _check_strict_inclusion,
    "minty_global_premaximal": _check_minty_global,
}


def verify_scenario(scenario):
    """Replay every expectation of a scenario, returning one Outcome per row."""
    outcomes = []
    for e in scenario.expectations:
        actual, witness = CHECKS[e.claim](scenario, e)
        outcome = Outcome(e, actual, witness)
        if not outcome.ok:
            logger.debug("%s: %s expected %r, got %r", scenario.name, e.claim, e.expected, actual)
        outcomes.append(outcome)
    return outcomes


def outcome_to_json(outcome):
    e = outcome.expectation
    return {
        "claim": e.claim,
        "expected": to_jsonable(e.expected),
        "actual": to_jsonable(outcome.actual),
        "witness": to_jsonable(outcome.witness),
        "ok": outcome.ok,
    }


def to_jsonable(value):
    """Nested tuples of scalars and pairs into JSON-ready lists."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if hasattr(value, "xstar"):
        return {"x": to_jsonable(value.x), "xstar": to_jsonable(value.xstar)}
    if isinstance(value, (tuple, list)):
        return [to_jsonable(v) for v in value]
    return format_scalar(value)


# --- Geometry helpers ---

def fiber_angular_width(T, x):
    """Opening angle in radians of the polar fibre at x, for dim 2 operators."""
    if T.dim != 2:
        raise InvalidParams(f"angular width needs a dim 2 operator, got dim {T.dim}")
    fiber = polar_fiber(T, x)
    if not fiber.normals:
        return 2 * math.pi
    rays = hcone_extreme_rays(fiber).generators
    if len(rays) <= 1:
        return 0.0
    angles = sorted(math.atan2(float(r[1]), float(r[0])) for r in rays)
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(2 * math.pi - (angles[-1] - angles[0]))
    return 2 * math.pi - max(gaps)
