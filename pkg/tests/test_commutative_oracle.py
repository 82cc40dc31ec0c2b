import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cstarhull import (
    CoverError,
    DiagonalFamily,
    Mode,
    UbabsSystem,
    apply_combination,
    lambda_sequence,
    plane_hull_distance,
    pointwise_hull_membership,
    projection_cover_decompose,
    scalar_hull_membership,
    ubabs_gap,
    validate_combination,
)

finite_floats = st.floats(-5.0, 5.0, allow_nan=False)


class TestScalarHullMembership:
    def test_pair_exact_excludes(self):
        assert not scalar_hull_membership([1.0, 1j], (1 + 1j) / 3, Mode.EXACT_UNITAL)

    def test_pair_sub_includes(self):
        assert scalar_hull_membership([1.0, 1j], (1 + 1j) / 3, Mode.SUB_UNITAL)

    def test_singleton(self):
        z = 0.3 - 0.7j
        assert scalar_hull_membership([z], z, Mode.EXACT_UNITAL)
        assert not scalar_hull_membership([z], z + 1e-6, Mode.EXACT_UNITAL)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.tuples(finite_floats, finite_floats), min_size=1, max_size=5),
        st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5),
    )
    def test_convex_combinations_are_members(self, pts, raw_w):
        values = [complex(re, im) for re, im in pts]
        w = np.array(raw_w[: len(values)]) + 1e-9
        w /= w.sum()
        target = complex(np.dot(w, values))
        assert scalar_hull_membership(values, target, Mode.EXACT_UNITAL)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.tuples(finite_floats, finite_floats), min_size=1, max_size=5),
        st.floats(0.0, 0.99),
    )
    def test_sub_mode_shrinks_members(self, pts, shrink):
        values = [complex(re, im) for re, im in pts]
        target = shrink * values[0]
        assert scalar_hull_membership(values, target, Mode.SUB_UNITAL)


class TestLambdaSequence:
    def test_first_values(self):
        seq = lambda_sequence(2)
        assert seq[0] == 1.0
        assert abs(seq[1] - cmath.exp(1j * math.pi / 4.0)) <= 1e-15

    def test_unit_modulus_and_increasing_arguments(self):
        seq = lambda_sequence(9)
        assert np.allclose(np.abs(seq), 1.0, atol=1e-15)
        args = np.angle(seq)
        assert np.all(np.diff(args) > 0)
        assert args[-1] < math.pi / 2.0

    def test_requires_positive_length(self):
        with pytest.raises(ValueError):
            lambda_sequence(0)


class TestPlaneHullDistance:
    def test_inside_is_zero(self):
        pts = [0.0, 1.0, 1j]
        assert plane_hull_distance(0.25 + 0.25j, pts) == 0.0

    def test_boundary_is_zero(self):
        assert plane_hull_distance(0.5, [0.0, 1.0, 1j]) <= 1e-15

    def test_outside_scalar(self):
        assert plane_hull_distance(2.0, [1.0], include_zero=True) == pytest.approx(1.0)

    def test_active_facet_of_circle_sequence(self):
        # brute force over all candidate segments confirms the nearest facet
        seq = lambda_sequence(6)
        others = [seq[i] for i in range(6) if i != 2]
        pts = others + [0j]
        target = seq[2]
        brute = min(
            _segment_distance(target, pts[i], pts[j])
            for i in range(len(pts))
            for j in range(i + 1, len(pts))
        )
        got = plane_hull_distance(target, others, include_zero=True)
        assert got == pytest.approx(brute, abs=1e-14)
        active = _segment_distance(target, seq[1], seq[3])
        assert got == pytest.approx(active, abs=1e-14)

    def test_degenerate_collinear(self):
        assert plane_hull_distance(2.0 + 1j, [0.0, 1.0, 0.5]) == pytest.approx(
            math.sqrt(2.0)
        )

    def test_requires_points(self):
        with pytest.raises(ValueError):
            plane_hull_distance(1.0, [])


def _segment_distance(p, a, b):
    p, a, b = complex(p), complex(a), complex(b)
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return abs(p - a)
    t = max(0.0, min(1.0, ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom))
    return abs(p - (a + t * ab))


class TestPointwiseHullMembership:
    def test_rejects_projection_swap_in_diagonal_algebra(self):
        family = DiagonalFamily(2, (np.array([1.0, 0.0], dtype=complex),))
        res = pointwise_hull_membership(
            family, np.array([0.0, 1.0], dtype=complex), Mode.SUB_UNITAL
        )
        assert not res.member
        assert res.failing_point == 1

    def test_two_point_average_weights(self):
        family = DiagonalFamily(
            2,
            (
                np.array([1.0, 0.0], dtype=complex),
                np.array([0.0, 1.0], dtype=complex),
            ),
        )
        res = pointwise_hull_membership(
            family, np.array([1 / 3, 1 / 3], dtype=complex), Mode.EXACT_UNITAL
        )
        assert res.member
        assert np.allclose(res.weights[0], [1 / 3, 2 / 3], atol=1e-9)
        assert np.allclose(res.weights[1], [2 / 3, 1 / 3], atol=1e-9)

    def test_generator_is_member(self):
        rng = np.random.default_rng(0)
        funcs = tuple(
            rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(3)
        )
        family = DiagonalFamily(3, funcs)
        res = pointwise_hull_membership(family, funcs[1], Mode.EXACT_UNITAL)
        assert res.member

    def test_weights_reproduce_target(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            m, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            funcs = tuple(
                rng.standard_normal(m) + 1j * rng.standard_normal(m) for _ in range(k)
            )
            family = DiagonalFamily(m, funcs)
            w = rng.random((m, k))
            w /= w.sum(axis=1, keepdims=True)
            target = np.array(
                [np.dot(w[x], [f[x] for f in funcs]) for x in range(m)], dtype=complex
            )
            res = pointwise_hull_membership(family, target, Mode.EXACT_UNITAL)
            assert res.member
            for x in range(m):
                rebuilt = np.dot(res.weights[x], [f[x] for f in funcs])
                assert abs(rebuilt - target[x]) <= 1e-7
                assert res.weights[x].sum() <= 1 + 1e-9

    def test_translation_invariance(self):
        # verdicts agree between (f_i) vs t and (a f_i - g) vs (a t - g)
        rng = np.random.default_rng(2)
        for _ in range(10):
            m, k = 3, 3
            funcs = tuple(
                rng.standard_normal(m) + 1j * rng.standard_normal(m) for _ in range(k)
            )
            family = DiagonalFamily(m, funcs)
            target = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            a = complex(rng.standard_normal(), rng.standard_normal())
            if abs(a) < 0.1:
                a += 0.5
            g = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            moved = DiagonalFamily(m, tuple(a * f - g for f in funcs))
            base = pointwise_hull_membership(family, target, Mode.EXACT_UNITAL).member
            shifted = pointwise_hull_membership(
                moved, a * target - g, Mode.EXACT_UNITAL
            ).member
            assert base == shifted

    def test_length_mismatch(self):
        family = DiagonalFamily(2, (np.array([1.0, 0.0], dtype=complex),))
        with pytest.raises(ValueError):
            pointwise_hull_membership(family, np.zeros(3, dtype=complex), Mode.SUB_UNITAL)


class TestUbabs:
    def _indicator_system(self, m):
        funcs = tuple(np.eye(m, dtype=complex)[i] for i in range(m))
        family = DiagonalFamily(m, funcs)
        return UbabsSystem(family=family, anchor_points=tuple(range(m)), eta=0.0)

    def test_indicator_gap_is_one(self):
        assert ubabs_gap(self._indicator_system(5)) == 1.0

    def test_half_eta_gap(self):
        funcs = (
            np.array([1.0, 0.5], dtype=complex),
            np.array([0.5, 1.0], dtype=complex),
        )
        system = UbabsSystem(
            family=DiagonalFamily(2, funcs), anchor_points=(0, 1), eta=0.5
        )
        assert ubabs_gap(system) == pytest.approx(0.5)

    def test_eta_one_rejected(self):
        funcs = (np.array([1.0, 1.0], dtype=complex),)
        with pytest.raises(ValueError):
            UbabsSystem(family=DiagonalFamily(2, funcs), anchor_points=(0,), eta=1.0)

    def test_peak_violation_rejected(self):
        funcs = (np.array([0.9, 0.0], dtype=complex),)
        with pytest.raises(ValueError):
            UbabsSystem(family=DiagonalFamily(2, funcs), anchor_points=(0,), eta=0.0)

    def test_off_anchor_violation_rejected(self):
        funcs = (
            np.array([1.0, 0.8], dtype=complex),
            np.array([0.0, 1.0], dtype=complex),
        )
        with pytest.raises(ValueError):
            UbabsSystem(
                family=DiagonalFamily(2, funcs), anchor_points=(0, 1), eta=0.5
            )

    def test_ubabs_is_separated_via_oracle(self):
        system = self._indicator_system(4)
        family = system.family
        for alpha in range(4):
            res = pointwise_hull_membership(
                family.without(alpha), family.functions[alpha], Mode.SUB_UNITAL
            )
            assert not res.member


class TestProjectionCoverDecompose:
    def test_single_cover(self):
        dec = projection_cover_decompose({0, 1}, [{0, 1}], points=3)
        assert dec.blocks == (frozenset({0, 1}),)
        assert len(dec.combination.terms) == 1

    def test_disjoint_covers(self):
        dec = projection_cover_decompose({0, 1}, [{0}, {1}], points=2)
        assert dec.blocks == (frozenset({0}), frozenset({1}))

    def test_greedy_overlap(self):
        dec = projection_cover_decompose({0, 1, 2}, [{0, 1}, {1, 2}], points=3)
        assert dec.blocks == (frozenset({0, 1}), frozenset({2}))
        value = apply_combination(dec.family, dec.combination).data
        assert np.array_equal(value, np.diag([1.0, 1.0, 1.0]).astype(complex))

    def test_evaluates_exactly_and_sub_valid(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = int(rng.integers(2, 7))
            covers = [
                set(int(p) for p in np.flatnonzero(rng.random(m) < 0.6))
                for _ in range(int(rng.integers(1, 4)))
            ]
            union = set().union(*covers) if covers else set()
            if not union:
                continue
            target = {p for p in union if rng.random() < 0.7} or {next(iter(union))}
            dec = projection_cover_decompose(target, covers, points=m)
            value = apply_combination(dec.family, dec.combination).data
            expected = np.diag([1.0 if p in target else 0.0 for p in range(m)])
            assert np.array_equal(value, expected.astype(complex))
            assert validate_combination(dec.family, dec.combination).valid

    def test_cover_violation(self):
        with pytest.raises(CoverError):
            projection_cover_decompose({0, 2}, [{0, 1}], points=3)
