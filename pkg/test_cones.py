"""Tests for polyhedral cones, double description and polyhedra."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from cones import (
    DimensionGuardExceeded, HCone, HPolyhedron, VCone, canonical_direction,
    classification_to_json, cone_contains, cone_direction_witness, cone_equal, cone_from_json,
    cone_member, cone_to_json, full_space, hcone_extreme_rays, hcone_member,
    hpolyhedron_from_json, hpolyhedron_member, hpolyhedron_to_json, normal_cone_of_points,
    polyhedron_bounds, polyhedron_classify, prune_hcone, vcone_member, zero_cone,
)
from scalar_lp import DimensionMismatch, FloatField, ModeMismatch, add, scale
from strategies import random_points, vectors


# --- Canonical forms ---

def test_canonical_direction_exact():
    """Verify exact directions become primitive integer vectors."""
    assert canonical_direction((2, 4)) == (1, 2)
    assert canonical_direction((Fraction(1, 2), Fraction(1, 3))) == (3, 2)
    assert canonical_direction((-2, 0)) == (-1, 0)


def test_canonical_direction_float():
    """Verify float directions are scaled to unit length."""
    assert canonical_direction((3.0, 4.0), FloatField()) == pytest.approx((0.6, 0.8))


def test_vcone_dedupes_generators():
    """Verify positive multiples and zero generators collapse."""
    c = VCone(2, [(1, 1), (2, 2), (0, 0)])
    assert c.generators == ((1, 1),)
    assert zero_cone(2).generators == ()


def test_cone_rejects_wrong_dimension():
    """Verify a normal of the wrong length raises DimensionMismatch."""
    with pytest.raises(DimensionMismatch):
        HCone(2, [(1, 0, 0)])
    with pytest.raises(DimensionMismatch):
        VCone(0)


# --- Membership ---

def test_hcone_membership():
    """Verify halfspace membership."""
    c = HCone(2, [(-1, 0)])
    assert hcone_member(c, (1, 5))
    assert hcone_member(c, (0, -3))
    assert not hcone_member(c, (-1, 0))


def test_vcone_membership():
    """Verify generator membership, including the zero vector."""
    c = VCone(2, [(1, 0), (0, 1)])
    assert vcone_member(c, (2, 3))
    assert not vcone_member(c, (-1, 0))
    assert vcone_member(zero_cone(2), (0, 0))
    assert not vcone_member(zero_cone(2), (1, 0))
    assert cone_member(c, (Fraction(1, 2), 0))


def test_direction_witness_on_vcone():
    """Verify the V-cone witness is a scaled generator with <d, v> = 1."""
    c = VCone(2, [(1, 0)])
    assert cone_direction_witness(c, (2, 0)) == (Fraction(1, 2), 0)
    assert cone_direction_witness(c, (0, 1)) is None


def test_direction_witness_on_hcone():
    """Verify the H-cone witness solves the strict-inequality LP."""
    c = HCone(1, [(-1,)])
    assert cone_direction_witness(c, (1,)) == (1,)
    assert cone_direction_witness(c, (-1,)) is None
    assert cone_direction_witness(full_space(1), (0,)) is None


# --- Normal cones ---

def test_normal_cone_of_points_at_vertex():
    """Verify the normal cone of a triangle at its corner is the negative orthant."""
    c = normal_cone_of_points([(0, 0), (1, 0), (0, 1)], (0, 0))
    assert c.normals == ((0, 1), (1, 0))
    assert hcone_extreme_rays(c).generators == ((-1, 0), (0, -1))


def test_normal_cone_of_points_outside_set():
    """Verify x need not belong to the set."""
    c = normal_cone_of_points([(-1,), (-2,)], (Fraction(1, 2),))
    assert c.normals == ((-1,),)
    assert cone_equal(c, VCone(1, [(1,)]))


def test_prune_hcone_drops_implied_normals():
    """Verify (1,1) is dropped once (1,0) and (0,1) are present."""
    c = prune_hcone(HCone(2, [(1, 0), (0, 1), (1, 1)]))
    assert c.normals == ((0, 1), (1, 0))


# --- Double description ---

def test_extreme_rays_of_full_space():
    """Verify the whole plane is generated by the four axis directions."""
    assert len(hcone_extreme_rays(full_space(2)).generators) == 4


def test_extreme_rays_of_halfplane():
    """Verify a halfplane keeps its boundary line as two opposite rays."""
    rays = hcone_extreme_rays(HCone(2, [(1, 0)])).generators
    assert rays == ((-1, 0), (0, -1), (0, 1))


def test_extreme_rays_of_zero_cone():
    """Verify opposite halfspaces in dim 1 leave only the origin."""
    assert hcone_extreme_rays(HCone(1, [(1,), (-1,)])).generators == ()


def test_extreme_rays_of_orthant():
    """Verify the nonnegative octant has the three unit rays."""
    c = HCone(3, [(-1, 0, 0), (0, -1, 0), (0, 0, -1)])
    assert hcone_extreme_rays(c).generators == ((0, 0, 1), (0, 1, 0), (1, 0, 0))


def test_double_description_guard():
    """Verify H to V conversion refuses dimensions above the guard."""
    with pytest.raises(DimensionGuardExceeded):
        hcone_extreme_rays(full_space(5))


@settings(max_examples=60)
@given(st.integers(min_value=1, max_value=3).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(vectors(d), max_size=4))), st.integers(0, 10_000))
def test_extreme_rays_generate_the_cone(case, seed):
    """Verify every sampled member of an H-cone lies in the cone of its extreme rays."""
    dim, normals = case
    c = HCone(dim, normals)
    rays = hcone_extreme_rays(c)
    assert all(hcone_member(c, r) for r in rays.generators)
    for v in random_points(dim, 10, seed):
        assert hcone_member(c, v) == vcone_member(rays, v)


# --- Containment ---

def test_cone_contains_mixed_representations():
    """Verify containment across H and V forms."""
    quadrant_h = HCone(2, [(-1, 0), (0, -1)])
    quadrant_v = VCone(2, [(1, 0), (0, 1)])
    ray = VCone(2, [(1, 1)])
    assert cone_equal(quadrant_h, quadrant_v)
    assert cone_contains(quadrant_h, ray)
    assert cone_contains(quadrant_v, ray)
    assert not cone_contains(ray, quadrant_h)
    assert cone_contains(full_space(2), quadrant_h)
    assert not cone_contains(quadrant_h, full_space(2))


def test_cone_contains_rejects_mixed_modes():
    """Verify exact and float cones cannot be compared."""
    with pytest.raises(ModeMismatch):
        cone_contains(HCone(1, [(1,)]), VCone(1, [(1.0,)], FloatField()))
    with pytest.raises(DimensionMismatch):
        cone_contains(HCone(1, [(1,)]), VCone(2, [(1, 0)]))


# --- Polyhedra ---

def test_polyhedron_classify_empty():
    """Verify x <= 0 and x >= 1 classifies as empty."""
    p = HPolyhedron(1, [((1,), 0), ((-1,), -1)])
    assert polyhedron_classify(p).kind == "empty"
    assert polyhedron_bounds(p) is None


def test_polyhedron_classify_singleton():
    """Verify 0 <= x <= 0 is the singleton {0}."""
    result = polyhedron_classify(HPolyhedron(1, [((1,), 0), ((-1,), 0)]))
    assert result.kind == "singleton"
    assert result.point == (0,)


def test_polyhedron_classify_larger_reports_bounds():
    """Verify a halfline is larger with one unbounded side."""
    result = polyhedron_classify(HPolyhedron(1, [((1,), 1)]))
    assert result.kind == "larger"
    assert result.bounds == ((None, 1),)


def test_hpolyhedron_member():
    """Verify membership of the unit box."""
    box = HPolyhedron(2, [((1, 0), 1), ((-1, 0), 1), ((0, 1), 1), ((0, -1), 1)])
    assert hpolyhedron_member(box, (1, Fraction(-1, 2)))
    assert not hpolyhedron_member(box, (2, 0))


# --- JSON ---

def test_cone_json_round_trip():
    """Verify cones survive a JSON round trip."""
    for c in (HCone(2, [(1, 2), (Fraction(1, 2), 0)]), VCone(2, [(1, 0), (0, 3)])):
        again = cone_from_json(json.loads(json.dumps(cone_to_json(c))))
        assert type(again) is type(c)
        assert cone_equal(again, c)


def test_polyhedron_json_round_trip():
    """Verify polyhedra and classifications serialise with rational strings."""
    p = HPolyhedron(1, [((1,), Fraction(1, 3))])
    data = hpolyhedron_to_json(p)
    assert data["constraints"][0]["rhs"] == "1/3"
    assert hpolyhedron_from_json(data).constraints == p.constraints
    out = classification_to_json(polyhedron_classify(p))
    assert out["kind"] == "larger"
    assert out["bounds"] == [[None, "1/3"]]


# --- Cone laws ---

cone_cases = st.integers(min_value=1, max_value=3).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(vectors(d), max_size=4), st.lists(vectors(d), max_size=3)))


@settings(max_examples=30)
@given(cone_cases, st.integers(0, 10_000))
def test_cone_members_are_closed_under_sums_and_scaling(case, seed):
    """Verify sampled members of an H-cone and of its ray form stay members under u + v and t u."""
    dim, normals, _ = case
    h = HCone(dim, normals)
    v = hcone_extreme_rays(h)
    members = [p for p in random_points(dim, 12, seed) if hcone_member(h, p)] + list(v.generators)
    for c in (h, v):
        for a in members:
            for t in (0, Fraction(1, 3), 1, 4):
                assert cone_member(c, scale(t, a))
            for b in members:
                assert cone_member(c, add(a, b))


@settings(max_examples=60)
@given(cone_cases)
def test_cone_equal_is_an_equivalence(case):
    """Verify equality is reflexive, symmetric and transitive across H form, pruned H form and rays."""
    dim, normals, _ = case
    forms = [HCone(dim, normals), prune_hcone(HCone(dim, normals)), hcone_extreme_rays(HCone(dim, normals))]
    for a in forms:
        assert cone_equal(a, a)
        for b in forms:
            assert cone_equal(a, b) == cone_equal(b, a)
            assert cone_equal(a, b)


@settings(max_examples=60)
@given(cone_cases)
def test_containment_is_a_partial_order(case):
    """Verify adding normals shrinks the cone along a nested chain."""
    dim, normals, extra = case
    small, smaller = normals[:len(normals) // 2], normals
    chain = [HCone(dim, small), HCone(dim, smaller), HCone(dim, smaller + extra)]
    for i in range(3):
        for j in range(i, 3):
            assert cone_contains(chain[i], chain[j])
    if not extra:
        assert cone_equal(chain[1], chain[2])
    assert cone_contains(chain[0], hcone_extreme_rays(chain[2]))
    assert cone_contains(full_space(dim), chain[0])
    assert cone_contains(chain[2], zero_cone(dim))


@settings(max_examples=60)
@given(st.integers(min_value=1, max_value=3).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(vectors(d), max_size=4),
                        st.lists(vectors(d), max_size=3), vectors(d))))
def test_normal_cone_is_antitone_in_the_point_set(case):
    """Verify a larger point set has a smaller normal cone at the same point."""
    dim, points, more, x = case
    small = normal_cone_of_points(points, x)
    large = normal_cone_of_points(points + more, x)
    assert cone_contains(small, large)
    assert cone_equal(normal_cone_of_points([], x), full_space(dim))
