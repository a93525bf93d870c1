"""Finite multivalued operators and their quasimonotone polar.

An operator is identified with its graph: a finite set of pairs (x, x*)
in R^d x R^d. The polar T^nu is infinite, so it is never materialised;
instead it is queried pairwise (polar_member) or fibre by fibre
(polar_fiber, an exact polyhedral cone).
"""

import logging
from dataclasses import dataclass

from cones import HPolyhedron, VCone, cone_direction_witness, full_space, normal_cone_of_points
from scalar_lp import (
    EXACT, DimensionMismatch, add, check_dim, dot, format_scalar, is_zero_vector,
    same_field, sub, vector,
)

logger = logging.getLogger(__name__)


# --- Graph Types ---

@dataclass(frozen=True, order=True)
class Pair:
    """One graph element (x, x*)."""
    x: tuple
    xstar: tuple

    @property
    def dim(self):
        return len(self.x)


def make_pair(x, xstar, field=EXACT):
    x, xstar = vector(x, field), vector(xstar, field)
    if len(x) != len(xstar):
        raise DimensionMismatch(f"point has dimension {len(x)}, covector {len(xstar)}")
    return Pair(x, xstar)


class OperatorGraph:
    """A finite operator T, stored as its deduplicated list of pairs.

    Pairs that differ only by a positive scaling of the covector are kept
    apart; the graph is a set of pairs, not of rays.
    """

    def __init__(self, dim, pairs=(), field=EXACT):
        if dim < 1:
            raise DimensionMismatch(f"dim must be positive, got {dim}")
        self.dim = dim
        self.field = field
        seen = set()
        ordered = []
        for p in pairs:
            if not isinstance(p, Pair):
                p = make_pair(p[0], p[1], field)
            else:
                p = make_pair(p.x, p.xstar, field)
            check_dim(dim, p.x)
            if p not in seen:
                seen.add(p)
                ordered.append(p)
        self.pairs = tuple(ordered)
        self._members = frozenset(ordered)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, p):
        return p in self._members

    def __eq__(self, other):
        return (isinstance(other, OperatorGraph) and self.dim == other.dim
                and self.field == other.field and self._members == other._members)

    def __hash__(self):
        return hash((self.dim, self._members))

    def __repr__(self):
        return f"OperatorGraph(dim={self.dim}, pairs={len(self.pairs)}, mode={self.field.mode})"

    def dom(self):
        return _unique(p.x for p in self.pairs)

    def ran(self):
        return _unique(p.xstar for p in self.pairs)

    def edom(self):
        """Base points carrying at least one nonzero covector."""
        return _unique(p.x for p in self.pairs if not is_zero_vector(p.xstar, self.field))

    def fiber(self, x):
        """The covectors T(x)."""
        x = vector(x, self.field)
        return [p.xstar for p in self.pairs if p.x == x]

    def union(self, other):
        same_field(self.field, other.field)
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot join operators of dimension {self.dim} and {other.dim}")
        return OperatorGraph(self.dim, self.pairs + other.pairs, self.field)

    def with_pair(self, p):
        return OperatorGraph(self.dim, self.pairs + (p,), self.field)

    def issubset(self, other):
        return self._members <= other._members


def _unique(items):
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


class ConicOperator:
    """cone(T), optionally joined with the zero section X x {0}.

    fibers maps each base point to the VCone of its covectors.
    """

    def __init__(self, dim, fibers, includes_zero_section=False, field=EXACT):
        self.dim = dim
        self.fibers = dict(fibers)
        self.includes_zero_section = includes_zero_section
        self.field = field

    def fiber(self, x):
        return self.fibers.get(tuple(x), VCone(self.dim, (), self.field))

    def edom(self):
        return [x for x, c in self.fibers.items() if c.generators]


@dataclass(frozen=True)
class RelationCheck:
    """Outcome of a relation test; witness explains a failure."""
    holds: bool
    witness: tuple = None

    def __bool__(self):
        return self.holds


# --- Relations ---

def qm_related(p, q, field=EXACT):
    """(x,x*) ~q (y,y*): min{<y-x, x*>, <x-y, y*>} <= 0."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"pairs of dimension {p.dim} and {q.dim}")
    d = sub(q.x, p.x)
    if not field.is_pos(dot(d, p.xstar)):
        return True
    return not field.is_pos(-dot(d, q.xstar))


def mono_related(p, q, field=EXACT):
    """<x-y, x*-y*> >= 0."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"pairs of dimension {p.dim} and {q.dim}")
    return not field.is_neg(dot(sub(p.x, q.x), sub(p.xstar, q.xstar)))


def _all_pairs(T, related):
    pairs = T.pairs
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            if not related(pairs[i], pairs[j], T.field):
                return RelationCheck(False, (pairs[i], pairs[j]))
    return RelationCheck(True)


def is_quasimonotone(T):
    """All pairs of T quasimonotonically related; witness is the first violation."""
    return _all_pairs(T, qm_related)


def is_monotone(T):
    return _all_pairs(T, mono_related)


def polar_member(T, p):
    """p in T^nu: p is ~q-related to every pair of T."""
    p = make_pair(p.x, p.xstar, T.field)
    check_dim(T.dim, p.x)
    for q in T.pairs:
        if not qm_related(p, q, T.field):
            return RelationCheck(False, (q,))
    return RelationCheck(True)


def mono_polar_member(T, p):
    """p in T^mu: monotonically related to every pair of T."""
    p = make_pair(p.x, p.xstar, T.field)
    check_dim(T.dim, p.x)
    for q in T.pairs:
        if not mono_related(p, q, T.field):
            return RelationCheck(False, (q,))
    return RelationCheck(True)


# --- Polar fibres ---

def v_set(T, x):
    """V_T(x): base points y with some y* in T(y) such that <x - y, y*> > 0."""
    x = vector(x, T.field)
    check_dim(T.dim, x)
    return _unique(q.x for q in T.pairs if T.field.is_pos(dot(sub(x, q.x), q.xstar)))


def polar_fiber(T, x):
    """T^nu(x) as an HCone: N_{V_T(x)}(x), or the whole space if V_T(x) is empty."""
    x = vector(x, T.field)
    active = v_set(T, x)
    if not active:
        return full_space(T.dim, T.field)
    fiber = normal_cone_of_points(active, x, T.field)
    logger.debug("polar fibre at %s: %d active points, %d normals", x, len(active), len(fiber.normals))
    return fiber


def mono_polar_fiber(T, x):
    """T^mu(x) = {x* : <x - y, x*> >= <x - y, y*> for all (y, y*) in T}."""
    x = vector(x, T.field)
    check_dim(T.dim, x)
    rows = []
    for q in T.pairs:
        d = sub(x, q.x)
        rows.append((tuple(-a for a in d), -dot(d, q.xstar)))
    return HPolyhedron(T.dim, rows, T.field)


def e_polyhedron(T):
    """E_T = {x : V_T(x) empty} = {x : <y*, x> <= <y*, y> for all (y, y*)}."""
    rows = [(q.xstar, dot(q.xstar, q.x)) for q in T.pairs
            if not is_zero_vector(q.xstar, T.field)]
    return HPolyhedron(T.dim, rows, T.field)


# --- Conic hulls ---

def conic_hull(T, with_zero_section=False):
    """cone(T), or cone(T) u (X x {0}) when with_zero_section is set."""
    fibers = {}
    for x in T.dom():
        fibers[x] = VCone(T.dim, T.fiber(x), T.field)
    return ConicOperator(T.dim, fibers, with_zero_section, T.field)


def conic_qm_check(C):
    """Quasimonotonicity of a ConicOperator, one LP question per base-point pair.

    The zero section never contributes a violation.
    """
    points = sorted(C.fibers)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            x, y = points[i], points[j]
            v = cone_direction_witness(C.fibers[x], sub(y, x))
            if v is None:
                continue
            w = cone_direction_witness(C.fibers[y], sub(x, y))
            if w is not None:
                return RelationCheck(False, (Pair(x, v), Pair(y, w)))
    return RelationCheck(True)


# --- Translations and perturbations ---

def translate(T, x0):
    """tau_{x0} T: every base point shifted by x0."""
    x0 = vector(x0, T.field)
    check_dim(T.dim, x0)
    return OperatorGraph(T.dim, [Pair(add(p.x, x0), p.xstar) for p in T.pairs], T.field)


def perturb(T, alpha):
    """T + alpha*: every covector shifted by alpha."""
    alpha = vector(alpha, T.field)
    check_dim(T.dim, alpha)
    return OperatorGraph(T.dim, [Pair(p.x, add(p.xstar, alpha)) for p in T.pairs], T.field)


# --- JSON ---

def pair_to_json(p):
    return {"x": [format_scalar(a) for a in p.x], "xstar": [format_scalar(a) for a in p.xstar]}


def graph_to_json(T):
    return {
        "dim": T.dim,
        "mode": T.field.mode,
        "pairs": [pair_to_json(p) for p in T.pairs],
    }


def graph_from_json(data, field=EXACT):
    pairs = [make_pair(p["x"], p["xstar"], field) for p in data["pairs"]]
    return OperatorGraph(int(data["dim"]), pairs, field)
