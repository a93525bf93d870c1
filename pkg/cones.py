"""Polyhedral cones and polyhedra.

HCone is the halfspace form {v : <a_i, v> <= 0}, VCone the generator form
cone(g_1, ..., g_k). Conversion H -> V uses the double description method
and is only offered for small dimension.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from scalar_lp import (
    EXACT, Constraint, DimensionMismatch, LPProblem, QpolarError,
    check_dim, dot, find_point, format_scalar, lp_feasible, same_field,
    scale, sub, vector,
)

logger = logging.getLogger(__name__)

DD_MAX_DIM = 4


# --- Exceptions ---

class DimensionGuardExceeded(QpolarError):
    """Raised when an H -> V conversion is requested above DD_MAX_DIM."""
    pass


# --- Canonical forms ---

def canonical_direction(v, field=EXACT):
    """Scale a nonzero vector to primitive integers (exact) or unit norm (float)."""
    if field.mode == "exact":
        denominators = [Fraction(a).denominator for a in v]
        lcm = math.lcm(*denominators)
        ints = [int(Fraction(a) * lcm) for a in v]
        g = math.gcd(*ints)
        return tuple(a // g for a in ints)
    norm = math.sqrt(sum(a * a for a in v))
    return tuple(a / norm for a in v)


def _canonical_set(vectors, field):
    seen = set()
    for v in vectors:
        if all(field.is_zero(a) for a in v):
            continue
        seen.add(canonical_direction(v, field))
    return tuple(sorted(seen))


# --- Cone types ---

class HCone:
    """Cone {v : <a_i, v> <= 0 for all i}. No normals means the whole space."""

    def __init__(self, dim, normals=(), field=EXACT):
        if dim < 1:
            raise DimensionMismatch(f"dim must be positive, got {dim}")
        normals = [vector(a, field) for a in normals]
        check_dim(dim, *normals)
        self.dim = dim
        self.field = field
        self.normals = _canonical_set(normals, field)

    def __repr__(self):
        return f"HCone(dim={self.dim}, normals={list(self.normals)})"


class VCone:
    """Cone of all nonnegative combinations of the generators.

    No generators means {0}. Generators are stored canonically: zeros
    dropped, scaled, deduplicated and sorted.
    """

    def __init__(self, dim, generators=(), field=EXACT):
        if dim < 1:
            raise DimensionMismatch(f"dim must be positive, got {dim}")
        generators = [vector(g, field) for g in generators]
        check_dim(dim, *generators)
        self.dim = dim
        self.field = field
        self.generators = _canonical_set(generators, field)

    def __repr__(self):
        return f"VCone(dim={self.dim}, generators={list(self.generators)})"


class HPolyhedron:
    """Intersection of halfspaces <normal, x> <= rhs."""

    def __init__(self, dim, constraints=(), field=EXACT):
        if dim < 1:
            raise DimensionMismatch(f"dim must be positive, got {dim}")
        rows = []
        for normal, rhs in constraints:
            normal = vector(normal, field)
            check_dim(dim, normal)
            rows.append((normal, field.coerce(rhs)))
        self.dim = dim
        self.field = field
        self.constraints = tuple(rows)

    def __repr__(self):
        return f"HPolyhedron(dim={self.dim}, constraints={list(self.constraints)})"


def full_space(dim, field=EXACT):
    return HCone(dim, (), field)


def zero_cone(dim, field=EXACT):
    return VCone(dim, (), field)


# --- Membership ---

def hcone_member(c, v):
    """True iff <a_i, v> <= 0 for every normal (within eps in float mode)."""
    check_dim(c.dim, v)
    f = c.field
    return not any(f.is_pos(dot(a, v)) for a in c.normals)


def vcone_member(c, v):
    """True iff v is a nonnegative combination of the generators."""
    check_dim(c.dim, v)
    f = c.field
    if all(f.is_zero(a) for a in v):
        return True
    gens = c.generators
    if not gens:
        return False
    k = len(gens)
    rows = [Constraint(tuple(-1 if j == i else 0 for j in range(k)), 0) for i in range(k)]
    for coord in range(c.dim):
        rows.append(Constraint(tuple(g[coord] for g in gens), v[coord], "="))
    return find_point(k, rows, f) is not None


def cone_member(c, v):
    if isinstance(c, HCone):
        return hcone_member(c, v)
    return vcone_member(c, v)


def cone_direction_witness(c, d):
    """A member v of the cone with <d, v> = 1, or None if <d, .> <= 0 on it.

    Cones are homogeneous, so "<d, v> > 0 is achievable" is the same question
    as "<d, v> = 1 is feasible".
    """
    check_dim(c.dim, d)
    f = c.field
    d = vector(d, f)
    if all(f.is_zero(a) for a in d):
        return None
    if isinstance(c, VCone):
        for g in c.generators:
            s = dot(d, g)
            if f.is_pos(s):
                return tuple(f.div(a, s) for a in g)
        return None
    rows = [Constraint(a, 0) for a in c.normals] + [Constraint(d, 1, "=")]
    return find_point(c.dim, rows, f)


# --- Normal cones ---

def prune_hcone(c):
    """Drop normals implied by the others (one LP per normal)."""
    kept = list(c.normals)
    for a in list(kept):
        others = [b for b in kept if b != a]
        rows = [Constraint(b, 0) for b in others] + [Constraint(a, 1, "=")]
        if find_point(c.dim, rows, c.field) is None:
            kept.remove(a)
    return HCone(c.dim, kept, c.field)


def normal_cone_of_points(points, x, field=EXACT):
    """N_C(x) = {x* : <y - x, x*> <= 0 for all y in C} for a finite C.

    C need not contain x; points equal to x contribute nothing. Over a finite
    set the cone equals the normal cone of its convex hull.
    """
    x = vector(x, field)
    dim = len(x)
    normals = []
    for y in points:
        y = vector(y, field)
        check_dim(dim, y)
        normals.append(sub(y, x))
    return prune_hcone(HCone(dim, normals, field))


# --- Double description ---

def _prune_generators(gens, dim, field):
    kept = list(gens)
    for g in list(kept):
        others = [h for h in kept if h != g]
        if others and vcone_member(VCone(dim, others, field), g):
            kept.remove(g)
    return kept


def hcone_extreme_rays(c):
    """Convert an HCone into a VCone with the same members.

    Starts from +-e_i (the whole space) and intersects one halfspace at a
    time, combining every positive/negative generator pair.
    """
    if c.dim > DD_MAX_DIM:
        raise DimensionGuardExceeded(
            f"double description is limited to dim <= {DD_MAX_DIM}, got {c.dim}")
    f = c.field
    rays = []
    for i in range(c.dim):
        e = tuple(1 if j == i else 0 for j in range(c.dim))
        rays.append(vector(e, f))
        rays.append(vector(scale(-1, e), f))
    for a in c.normals:
        pos, neg, zero = [], [], []
        for r in rays:
            s = dot(a, r)
            if f.is_pos(s):
                pos.append((r, s))
            elif f.is_neg(s):
                neg.append((r, s))
            else:
                zero.append(r)
        combined = []
        for p, sp in pos:
            for n, sn in neg:
                combined.append(sub(scale(sp, n), scale(sn, p)))
        candidates = VCone(c.dim, zero + [n for n, _ in neg] + combined, f).generators
        rays = _prune_generators(candidates, c.dim, f)
    logger.debug("extreme rays of %r: %s", c, rays)
    return VCone(c.dim, rays, f)


# --- Containment ---

def cone_contains(outer, inner):
    """Exact set containment inner <= outer for any mix of H and V cones."""
    same_field(outer.field, inner.field)
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"cones of dimension {outer.dim} and {inner.dim}")
    if isinstance(inner, VCone):
        return all(cone_member(outer, g) for g in inner.generators)
    if isinstance(outer, HCone):
        return all(cone_direction_witness(inner, a) is None for a in outer.normals)
    rays = hcone_extreme_rays(inner)
    return all(vcone_member(outer, g) for g in rays.generators)


def cone_equal(a, b):
    return cone_contains(a, b) and cone_contains(b, a)


# --- Polyhedra ---

@dataclass(frozen=True)
class PolyhedronClass:
    """kind is "empty", "singleton" or "larger"."""
    kind: str
    point: tuple = None
    bounds: tuple = None


def hpolyhedron_member(p, x):
    check_dim(p.dim, x)
    f = p.field
    return not any(f.is_pos(dot(a, x) - b) for a, b in p.constraints)


def _rows(p):
    return tuple(Constraint(a, b) for a, b in p.constraints)


def polyhedron_bounds(p):
    """Per-coordinate (min, max); None marks an unbounded side.

    Returns None when the polyhedron is empty.
    """
    f = p.field
    rows = _rows(p)
    bounds = []
    for k in range(p.dim):
        e = tuple(1 if j == k else 0 for j in range(p.dim))
        hi = lp_feasible(LPProblem(p.dim, rows, e, f))
        if not hi.feasible:
            return None
        lo = lp_feasible(LPProblem(p.dim, rows, scale(-1, e), f))
        bounds.append((
            -lo.value if lo.status == "optimal" else None,
            hi.value if hi.status == "optimal" else None,
        ))
    return tuple(bounds)


def polyhedron_classify(p):
    """Empty, Singleton(point) or Larger, using 2*dim coordinate LPs."""
    f = p.field
    point = find_point(p.dim, _rows(p), f)
    if point is None:
        return PolyhedronClass("empty")
    bounds = polyhedron_bounds(p)
    if all(lo is not None and hi is not None and f.is_zero(hi - lo) for lo, hi in bounds):
        return PolyhedronClass("singleton", tuple(hi for _, hi in bounds), bounds)
    return PolyhedronClass("larger", point, bounds)


# --- JSON ---

def _vec_json(v):
    return [format_scalar(a) for a in v]


def cone_to_json(c):
    if isinstance(c, HCone):
        return {"dim": c.dim, "normals": [_vec_json(a) for a in c.normals]}
    return {"dim": c.dim, "generators": [_vec_json(g) for g in c.generators]}


def cone_from_json(data, field=EXACT):
    if "normals" in data:
        return HCone(int(data["dim"]), data["normals"], field)
    return VCone(int(data["dim"]), data["generators"], field)


def hpolyhedron_to_json(p):
    return {
        "dim": p.dim,
        "constraints": [{"normal": _vec_json(a), "rhs": format_scalar(b)}
                        for a, b in p.constraints],
    }


def hpolyhedron_from_json(data, field=EXACT):
    rows = [(c["normal"], c["rhs"]) for c in data["constraints"]]
    return HPolyhedron(int(data["dim"]), rows, field)


def classification_to_json(result):
    out = {"kind": result.kind}
    if result.point is not None:
        out["point"] = _vec_json(result.point)
    if result.bounds is not None:
        out["bounds"] = [[None if lo is None else format_scalar(lo),
                          None if hi is None else format_scalar(hi)]
                         for lo, hi in result.bounds]
    return out
