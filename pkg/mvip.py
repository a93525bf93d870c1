"""Minty variational inequalities over finite constraint sets.

M(T, K) is the set of x in K with <x - y, y*> <= 0 for every (y, y*) in T
whose base point lies in K. K is always a finite point set; intervals are
represented by grids.
"""

import logging
from dataclasses import dataclass

from cones import HPolyhedron, cone_direction_witness, hpolyhedron_member, polyhedron_classify
from operators import e_polyhedron, is_quasimonotone, polar_fiber, v_set
from scalar_lp import EXACT, DimensionMismatch, EmptyInput, QpolarError, check_dim, dot, format_scalar, sub, vector

logger = logging.getLogger(__name__)


# --- Exceptions ---

class MintyMismatch(QpolarError):
    """Raised when the direct and V_T formulations of M(T, K) disagree."""
    pass


class ClaimViolation(QpolarError):
    """Raised when a pre-maximal operator breaks the E-set dichotomy."""
    pass


# --- Constraint sets ---

class ConstraintSet:
    """A finite set K of points, deduplicated in input order."""

    def __init__(self, dim, points, field=EXACT):
        if dim < 1:
            raise DimensionMismatch(f"dim must be positive, got {dim}")
        unique = []
        for x in points:
            x = vector(x, field)
            check_dim(dim, x)
            if x not in unique:
                unique.append(x)
        if not unique:
            raise EmptyInput("a constraint set needs at least one point")
        self.dim = dim
        self.field = field
        self.points = tuple(unique)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"ConstraintSet(dim={self.dim}, points={len(self.points)})"


def constraint_set_to_json(K):
    return {"dim": K.dim, "points": [[format_scalar(a) for a in x] for x in K.points]}


def constraint_set_from_json(data, field=EXACT):
    return ConstraintSet(int(data["dim"]), data["points"], field)


def _check(T, K):
    if T.dim != K.dim:
        raise DimensionMismatch(f"operator of dimension {T.dim}, constraint set of dimension {K.dim}")


# --- Solvers ---

def minty_direct(T, K):
    """The literal definition: a double loop over K and the pairs of T."""
    _check(T, K)
    f = T.field
    inside = set(K.points)
    local = [q for q in T.pairs if q.x in inside]
    return [x for x in K.points
            if not any(f.is_pos(dot(sub(x, q.x), q.xstar)) for q in local)]


def minty_via_vset(T, K):
    """{x in K : V_T(x) and K are disjoint}."""
    _check(T, K)
    inside = set(K.points)
    return [x for x in K.points if not inside.intersection(v_set(T, x))]


def minty_solve(T, K):
    """M(T, K), computed both ways and cross-checked."""
    direct = minty_direct(T, K)
    other = minty_via_vset(T, K)
    if direct != other:
        raise MintyMismatch(f"direct solution {direct} differs from V_T solution {other}")
    return direct


def minty_solve_polar(T, K):
    """M(T^nu, K): no fibre at y in K has a covector w with <x - y, w> > 0."""
    _check(T, K)
    fibers = {y: polar_fiber(T, y) for y in K.points}
    solutions = []
    for x in K.points:
        if all(cone_direction_witness(fibers[y], sub(x, y)) is None for y in K.points):
            solutions.append(x)
    logger.debug("M(T^nu, K): %d of %d points", len(solutions), len(K))
    return solutions


def minty_inclusion_witness(T):
    """For a non-quasimonotone T, a two-point K and a point v in M(T^nu, K) outside M(T, K).

    Returns None when T is quasimonotone, since then M(T^nu, K) is always
    contained in M(T, K).
    """
    check = is_quasimonotone(T)
    if check:
        return None
    p, q = check.witness
    K = ConstraintSet(T.dim, [p.x, q.x], T.field)
    return K, q.x


# --- Global problem ---

@dataclass(frozen=True)
class MintyGlobal:
    """M(T, X) = E_T, with its classification."""
    polyhedron: HPolyhedron
    kind: str
    point: tuple = None
    bounds: tuple = None


def minty_global(T, grid=None, premaximal=False):
    """Classify E_T. With premaximal set, enforce the empty-or-singleton
    dichotomy and, on grid, agreement with the polar-side E set.
    """
    E = e_polyhedron(T)
    result = polyhedron_classify(E)
    if premaximal:
        if result.kind == "larger":
            raise ClaimViolation(f"E_T of a pre-maximal operator must be empty or a singleton, got {result.bounds}")
        if grid is not None:
            points = getattr(grid, "base_points", grid)
            K = ConstraintSet(T.dim, points, T.field)
            on_grid = [x for x in K.points if hpolyhedron_member(E, x)]
            polar_side = minty_solve_polar(T, K)
            if on_grid != polar_side:
                raise ClaimViolation(f"E_T on grid {on_grid} differs from E_T^nu on grid {polar_side}")
    return MintyGlobal(E, result.kind, result.point, result.bounds)
