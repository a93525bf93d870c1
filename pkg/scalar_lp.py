"""Scalar fields and a small dense simplex kernel.

Every geometric predicate in qpolar reduces to a feasibility question over a
handful of linear constraints. Exact mode keeps all numbers as rationals so
set equalities come out crisp; float mode trades that for speed with an
explicit tolerance.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

logger = logging.getLogger(__name__)


# --- Exceptions ---

class QpolarError(Exception):
    """Base class for every error raised by qpolar."""
    pass


class DimensionMismatch(QpolarError, ValueError):
    """Raised when vectors or objects of different dimension are combined."""
    pass


class ModeMismatch(QpolarError, ValueError):
    """Raised when exact and float objects are mixed."""
    pass


class ScalarError(QpolarError, ValueError):
    """Raised for numbers that cannot enter a field (NaN, inf, garbage)."""
    pass


class LPError(QpolarError, ValueError):
    """Raised for an ill-formed linear program."""
    pass


class EmptyInput(QpolarError, ValueError):
    """Raised when a grid or constraint set has no points."""
    pass


# --- Fields ---

class ExactField:
    """Rational arithmetic. Integral values are kept as plain ints."""
    mode = "exact"
    eps = 0

    def coerce(self, value):
        if isinstance(value, bool):
            raise ScalarError(f"not a number: {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ScalarError(f"non-finite number: {value!r}")
            # Decimal literal, not the binary expansion: 0.1 -> 1/10
            value = Fraction(repr(value))
        elif isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError):
                raise ScalarError(f"not a rational: {value!r}")
        elif not isinstance(value, Fraction):
            try:
                value = Fraction(value)
            except (TypeError, ValueError):
                raise ScalarError(f"not a number: {value!r}")
        return value.numerator if value.denominator == 1 else value

    def div(self, a, b):
        q = Fraction(a) / b
        return q.numerator if q.denominator == 1 else q

    def is_pos(self, v):
        return v > 0

    def is_neg(self, v):
        return v < 0

    def is_zero(self, v):
        return v == 0

    def __eq__(self, other):
        return isinstance(other, ExactField)

    def __hash__(self):
        return hash("exact")

    def __repr__(self):
        return "ExactField()"


class FloatField:
    """Double precision with a tolerance: "> 0" means "> eps"."""
    mode = "float"

    def __init__(self, eps=1e-9):
        if not eps > 0:
            raise ScalarError(f"eps must be positive, got {eps!r}")
        self.eps = float(eps)

    def coerce(self, value):
        if isinstance(value, bool):
            raise ScalarError(f"not a number: {value!r}")
        if isinstance(value, str):
            try:
                value = float(Fraction(value.strip()))
            except (ValueError, ZeroDivisionError):
                raise ScalarError(f"not a number: {value!r}")
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ScalarError(f"not a number: {value!r}")
        if not math.isfinite(value):
            raise ScalarError(f"non-finite number: {value!r}")
        return value

    def div(self, a, b):
        return a / b

    def is_pos(self, v):
        return v > self.eps

    def is_neg(self, v):
        return v < -self.eps

    def is_zero(self, v):
        return -self.eps <= v <= self.eps

    def __eq__(self, other):
        return isinstance(other, FloatField) and other.eps == self.eps

    def __hash__(self):
        return hash(("float", self.eps))

    def __repr__(self):
        return f"FloatField(eps={self.eps!r})"


EXACT = ExactField()


def make_field(mode="exact", eps=1e-9):
    """Build the field named by a mode string."""
    if mode == "exact":
        return EXACT
    if mode == "float":
        return FloatField(eps)
    raise ScalarError(f"unknown mode: {mode!r} (expected 'exact' or 'float')")


def same_field(*fields):
    """Return the common field, raising ModeMismatch if they differ."""
    first = fields[0]
    for f in fields[1:]:
        if f != first:
            raise ModeMismatch(f"cannot mix {first!r} with {f!r}")
    return first


# --- Scalars and vectors ---

def snap_to_rational(v, max_denominator):
    """Best rational approximation of v with denominator <= max_denominator."""
    if max_denominator < 1:
        raise ScalarError(f"max_denominator must be >= 1, got {max_denominator}")
    v = float(v)
    if not math.isfinite(v):
        raise ScalarError(f"non-finite number: {v!r}")
    snapped = Fraction(v).limit_denominator(int(max_denominator))
    return snapped.numerator if snapped.denominator == 1 else snapped


def format_scalar(v):
    """Render a scalar for JSON: "p/q" strings for rationals, floats as-is."""
    if isinstance(v, float):
        return v
    return str(v)


def vector(values, field=EXACT):
    """Coerce an iterable into a tuple of field scalars."""
    return tuple(field.coerce(v) for v in values)


def check_dim(dim, *vectors):
    for v in vectors:
        if len(v) != dim:
            raise DimensionMismatch(f"expected dimension {dim}, got {len(v)}")


def dot(u, v):
    if len(u) != len(v):
        raise DimensionMismatch(f"cannot pair vectors of dimension {len(u)} and {len(v)}")
    return sum(a * b for a, b in zip(u, v))


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def scale(t, v):
    return tuple(t * a for a in v)


def is_zero_vector(v, field=EXACT):
    return all(field.is_zero(a) for a in v)


# --- Linear programs ---

@dataclass(frozen=True)
class Constraint:
    """One row: <normal, x> (sense) rhs, sense is "<=" or "="."""
    normal: tuple
    rhs: object
    sense: str = "<="


@dataclass(frozen=True)
class LPProblem:
    """Maximise <objective, x> over free x in R^dim subject to constraints."""
    dim: int
    constraints: tuple = ()
    objective: tuple = None
    field: object = EXACT

    def __post_init__(self):
        if self.dim < 1:
            raise LPError(f"dim must be positive, got {self.dim}")
        if not self.constraints and self.objective is None:
            raise LPError("an LP needs at least one constraint or an objective")
        for c in self.constraints:
            if len(c.normal) != self.dim:
                raise DimensionMismatch(
                    f"constraint normal has dimension {len(c.normal)}, expected {self.dim}")
            if c.sense not in ("<=", "="):
                raise LPError(f"unknown constraint sense: {c.sense!r}")
        if self.objective is not None and len(self.objective) != self.dim:
            raise DimensionMismatch(
                f"objective has dimension {len(self.objective)}, expected {self.dim}")


@dataclass(frozen=True)
class LPResult:
    """status is "infeasible", "optimal" or "unbounded".

    Without an objective a feasible problem reports "optimal" with value 0.
    """
    status: str
    point: tuple = None
    value: object = None
    ray: tuple = None

    @property
    def feasible(self):
        return self.status != "infeasible"


class _Tableau:
    """Dense tableau over non-negative variables, rows A z = b with b >= 0."""

    def __init__(self, rows, rhs, n, field):
        self.field = field
        self.m = len(rows)
        self.n = n
        self.rows = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = [None] * self.m

    def pivot(self, i, j):
        f = self.field
        row = self.rows[i]
        piv = row[j]
        row[:] = [f.div(a, piv) for a in row]
        for k in range(self.m):
            if k == i:
                continue
            factor = self.rows[k][j]
            if f.is_zero(factor):
                self.rows[k][j] = 0
                continue
            other = self.rows[k]
            other[:] = [a - factor * b for a, b in zip(other, row)]
            other[j] = 0
        self.basis[i] = j

    def reduced_cost(self, cost, j):
        return cost[j] - sum(cost[self.basis[i]] * self.rows[i][j] for i in range(self.m))

    def run(self, cost, allowed):
        """Maximise cost.z from the current basis with Bland's rule.

        Returns ("optimal", None) or ("unbounded", entering column).
        """
        f = self.field
        while True:
            entering = None
            for j in allowed:
                if j in self.basis:
                    continue
                if f.is_pos(self.reduced_cost(cost, j)):
                    entering = j
                    break
            if entering is None:
                return "optimal", None
            best = None
            for i in range(self.m):
                a = self.rows[i][entering]
                if not f.is_pos(a):
                    continue
                key = (f.div(self.rows[i][-1], a), self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return "unbounded", entering
            self.pivot(best[1], entering)

    def values(self):
        z = [0] * self.n
        for i, j in enumerate(self.basis):
            z[j] = self.rows[i][-1]
        return z


def lp_feasible(problem):
    """Solve an LPProblem with the two-phase simplex method.

    Variables are free; each is split as x = x+ - x-. Inequalities get a
    slack, every row gets an artificial for phase 1.
    """
    f = problem.field
    d = problem.dim
    ineq = [c for c in problem.constraints if c.sense == "<="]
    n_slack = len(ineq)
    m = len(problem.constraints)
    n_struct = 2 * d + n_slack
    n_total = n_struct + m

    rows, rhs = [], []
    slack = 0
    for i, c in enumerate(problem.constraints):
        normal = [f.coerce(a) for a in c.normal]
        b = f.coerce(c.rhs)
        row = normal + [-a for a in normal] + [0] * n_slack + [0] * m
        if c.sense == "<=":
            row[2 * d + slack] = 1
            slack += 1
        if f.is_neg(b):
            row = [-a for a in row]
            b = -b
        row[n_struct + i] = 1
        rows.append(row)
        rhs.append(b)

    tab = _Tableau(rows, rhs, n_total, f)
    for i in range(m):
        tab.basis[i] = n_struct + i

    # Phase 1: maximise -sum(artificials); artificials never re-enter
    if m:
        cost1 = [0] * n_struct + [-1] * m
        tab.run(cost1, range(n_struct))
        infeasibility = sum(tab.values()[n_struct:])
        if f.is_pos(infeasibility):
            logger.debug("LP infeasible (phase-1 residual %s)", infeasibility)
            return LPResult("infeasible")
        _drive_out_artificials(tab, n_struct)

    if problem.objective is None:
        return LPResult("optimal", _recover(tab.values(), d, f), f.coerce(0))

    c = [f.coerce(a) for a in problem.objective]
    cost2 = c + [-a for a in c] + [0] * (n_total - 2 * d)
    status, entering = tab.run(cost2, range(n_struct))
    point = _recover(tab.values(), d, f)
    if status == "unbounded":
        direction = [0] * n_total
        direction[entering] = 1
        for i, j in enumerate(tab.basis):
            direction[j] = -tab.rows[i][entering]
        ray = _recover(direction, d, f)
        logger.debug("LP unbounded along %s", ray)
        return LPResult("unbounded", point, None, ray)
    return LPResult("optimal", point, dot(tuple(c), point))


def _drive_out_artificials(tab, n_struct):
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    f = tab.field
    i = 0
    while i < tab.m:
        if tab.basis[i] < n_struct:
            i += 1
            continue
        col = next((j for j in range(n_struct)
                    if j not in tab.basis and not f.is_zero(tab.rows[i][j])), None)
        if col is None:
            del tab.rows[i]
            del tab.basis[i]
            tab.m -= 1
            continue
        tab.pivot(i, col)
        i += 1


def _recover(z, d, field):
    return tuple(field.coerce(z[k] - z[d + k]) for k in range(d))


def find_point(dim, constraints, field=EXACT):
    """Feasible point of a constraint list, or None when infeasible."""
    if not constraints:
        return tuple(field.coerce(0) for _ in range(dim))
    result = lp_feasible(LPProblem(dim, tuple(constraints), None, field))
    return result.point if result.feasible else None
