"""Tests for domains, grid functions, cell averages, and the operator."""

import math

import numpy as np
import pytest

from kanops.errors import ArgumentError, NumericError
from kanops.kernels import density_l1, make_kernel
from kanops.normspaces import MixedExponents, mixed_lebesgue_norm, sup_error
from kanops.operator import (
    BoxDomain,
    CellAverageTensor,
    GridFunction,
    ScalarField,
    cell_averages,
    evaluate_on_grid,
    kantorovich_apply_grid,
    kantorovich_eval,
    masked_cell_averages,
    step_field,
)

from _oracles import naive_kantorovich

UNIT = BoxDomain.unit(1)
UNIT2 = BoxDomain.unit(2)


class TestBoxDomain:
    def test_basic_properties(self):
        box = BoxDomain((-2.0, 1.0), (3.0, 4.0))
        assert box.ndim == 2
        assert box.widths() == (5.0, 3.0)

    def test_unit_factory(self):
        box = BoxDomain.unit(3)
        assert box.lower == (0.0, 0.0, 0.0)
        assert box.upper == (1.0, 1.0, 1.0)

    def test_rejects_empty(self):
        with pytest.raises(ArgumentError):
            BoxDomain((), ())

    def test_rejects_length_mismatch(self):
        with pytest.raises(ArgumentError):
            BoxDomain((0.0,), (1.0, 2.0))

    def test_rejects_non_finite(self):
        with pytest.raises(ArgumentError):
            BoxDomain((0.0,), (math.inf,))

    def test_rejects_degenerate_interval(self):
        with pytest.raises(ArgumentError):
            BoxDomain((0.0, 0.0), (1.0, 0.0))


class TestGridFunction:
    def test_axis_layout(self):
        # Coordinate 1 varies along the last axis: a 2-D grid with 4
        # samples along coordinate 1 and 3 along coordinate 2 stores
        # values with shape (3, 4).
        g = GridFunction(UNIT2, np.zeros((3, 4)))
        assert g.points_along(1) == 4
        assert g.points_along(2) == 3

    def test_spacing_in_coordinate_order(self):
        box = BoxDomain((0.0, 0.0), (1.0, 2.0))
        g = GridFunction(box, np.zeros((8, 4)))
        assert g.spacing() == (1.0 / 4.0, 2.0 / 8.0)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            GridFunction(UNIT2, np.zeros(5))

    def test_rejects_empty(self):
        with pytest.raises(ArgumentError):
            GridFunction(UNIT, np.zeros(0))

    def test_rejects_non_finite(self):
        with pytest.raises(ArgumentError):
            GridFunction(UNIT, np.array([1.0, math.nan]))

    def test_values_are_copied_to_float(self):
        raw = np.array([1, 2, 3])
        g = GridFunction(UNIT, raw)
        raw[0] = 99
        assert g.values[0] == 1.0
        assert g.values.dtype == np.float64


class TestStepField:
    def test_pixel_lookup_convention(self):
        # values[row, col] = f(x1 = col position, x2 = row position).
        values = np.array([[0.0, 1.0, 2.0], [10.0, 11.0, 12.0]])
        f = step_field(values, UNIT2)
        assert f(0.0, 0.0) == 0.0
        assert f(1.0, 0.0) == 2.0
        assert f(0.0, 1.0) == 10.0
        assert f(1.0, 1.0) == 12.0

    def test_floor_indexing(self):
        values = np.array([0.0, 1.0, 2.0, 3.0])
        f = step_field(values, UNIT)
        # t * (N - 1) floors: samples switch at 1/3 and 2/3.
        assert f(0.32) == 0.0
        assert f(0.34) == 1.0
        assert f(0.99) == 2.0
        assert f(1.0) == 3.0

    def test_out_of_domain_clamps(self):
        values = np.array([5.0, 6.0])
        f = step_field(values, UNIT)
        assert f(-3.0) == 5.0
        assert f(42.0) == 6.0

    def test_vectorized_lookup(self):
        values = np.arange(12.0).reshape(3, 4)
        f = step_field(values, UNIT2)
        x1 = np.array([0.0, 1.0])
        out = f(x1, np.array([0.0, 1.0]))
        assert out.tolist() == [0.0, 11.0]

    def test_rejects_wrong_arity(self):
        f = step_field(np.zeros((2, 2)), UNIT2)
        with pytest.raises(ArgumentError):
            f(0.5)

    def test_grid_function_as_field(self):
        g = GridFunction(UNIT, np.array([4.0, 8.0]))
        assert g.as_field()(0.2) == 4.0


class TestCellAverages:
    def test_constant_field(self):
        f = ScalarField(lambda u: np.full_like(np.asarray(u), 3.25), UNIT)
        for n, m in [(1, 1), (2, 3), (5, 4)]:
            coeffs = cell_averages(f, n, m)
            assert coeffs.coeffs.shape == (2 * n,)
            assert np.max(np.abs(coeffs.coeffs - 3.25)) == 0.0

    def test_linear_field_midpoint_is_exact(self):
        f = ScalarField(lambda u: u, UNIT)
        coeffs = cell_averages(f, 2, 1)
        # Cell [0, 0.5] is k = 0, stored at offset index n + 0 = 2.
        assert coeffs.coeffs[2] == pytest.approx(0.25, abs=1e-15)

    def test_quadratic_field_single_midpoint(self):
        f = ScalarField(lambda u: u**2, UNIT)
        coeffs = cell_averages(f, 2, 1)
        exact = (0.5**3 / 3.0) / 0.5  # mean of u^2 over [0, 0.5]
        value = coeffs.coeffs[2]
        assert value == pytest.approx(0.0625, abs=1e-15)
        assert exact == pytest.approx(0.08333, abs=5e-6)
        # The midpoint estimate sharpens as m grows.
        finer = cell_averages(f, 2, 16).coeffs[2]
        assert abs(finer - exact) < abs(value - exact)

    def test_out_of_domain_cells_clamp(self):
        f = ScalarField(lambda u: u, UNIT)
        coeffs = cell_averages(f, 2, 2)
        # Cell k = -2 covers [-1, -0.5]; every subsample clamps to u = 0.
        assert coeffs.coeffs[0] == 0.0

    def test_coordinate_order_in_two_dimensions(self):
        f = ScalarField(lambda u1, u2: u1 + 10.0 * u2, UNIT2)
        coeffs = cell_averages(f, 1, 1)
        # Storage: coeffs[k2 + n, k1 + n]. Cell (k1, k2) = (0, 0) covers
        # [0,1]^2 with midpoint (0.5, 0.5).
        assert coeffs.coeffs[1, 1] == pytest.approx(5.5, abs=1e-14)
        # Cell (k1, k2) = (-1, 0) clamps u1 to 0, keeps u2 = 0.5.
        assert coeffs.coeffs[1, 0] == pytest.approx(5.0, abs=1e-14)
        # Cell (k1, k2) = (0, -1) keeps u1 = 0.5, clamps u2 to 0.
        assert coeffs.coeffs[0, 1] == pytest.approx(0.5, abs=1e-14)

    def test_rejects_bad_orders(self):
        f = ScalarField(lambda u: u, UNIT)
        with pytest.raises(ArgumentError):
            cell_averages(f, 0)
        with pytest.raises(ArgumentError):
            cell_averages(f, 2, 0)

    def test_non_finite_sample_names_cell(self):
        def bad(u):
            u = np.asarray(u)
            return np.where(u > 0.6, np.nan, u)

        with pytest.raises(NumericError, match=r"cell k=\(1,\)"):
            cell_averages(ScalarField(bad, UNIT), 2, 1)


class TestMaskedCellAverages:
    def test_partial_cell_uses_valid_samples_only(self):
        def partial(u):
            u = np.asarray(u, dtype=np.float64)
            return np.where(u < 0.25, np.nan, u)

        coeffs = masked_cell_averages(ScalarField(partial, UNIT), 1, 4)
        assert coeffs.valid is not None
        # Cell k = 0 covers [0, 1]; subsamples 0.125 is NaN, the rest
        # (0.375, 0.625, 0.875) average to 0.625.
        assert coeffs.valid[1]
        assert coeffs.coeffs[1] == pytest.approx(0.625, abs=1e-15)

    def test_fully_masked_cell_is_invalid_with_zero_coeff(self):
        def gone(u):
            u = np.asarray(u, dtype=np.float64)
            return np.where(u < 0.5, np.nan, u)

        coeffs = masked_cell_averages(ScalarField(gone, UNIT), 1, 2)
        # Cell k = -1 clamps all subsamples to u = 0 -> NaN -> invalid.
        assert not coeffs.valid[0]
        assert coeffs.coeffs[0] == 0.0

    def test_infinite_sample_is_an_error(self):
        def blows_up(u):
            u = np.asarray(u, dtype=np.float64)
            return np.where(u > 0.5, np.inf, u)

        with pytest.raises(NumericError, match="infinite"):
            masked_cell_averages(ScalarField(blows_up, UNIT), 1, 2)

    def test_unmasked_field_matches_plain_cell_averages(self):
        f = ScalarField(lambda u1, u2: np.sin(u1) + u2, UNIT2)
        plain = cell_averages(f, 3, 2)
        masked = masked_cell_averages(f, 3, 2)
        assert np.array_equal(plain.coeffs, masked.coeffs)
        assert masked.valid.all()


class TestCellAverageTensor:
    def test_shape_enforced(self):
        with pytest.raises(ArgumentError):
            CellAverageTensor(n=2, r=1, coeffs=np.zeros(3), domain=UNIT)

    def test_non_finite_coeffs_rejected_when_unmasked(self):
        with pytest.raises(ArgumentError):
            CellAverageTensor(
                n=1, r=1, coeffs=np.array([np.nan, 0.0]), domain=UNIT
            )


class TestKantorovichEval:
    def test_constant_reproduction_pointwise(self):
        f = ScalarField(
            lambda u1, u2: np.full(np.broadcast(u1, u2).shape, -2.5), UNIT2
        )
        coeffs = cell_averages(f, 3, 2)
        for kernel in ("tanh", "logistic", "ramp", "bspline:3"):
            for x in [(0.0, 0.0), (0.3, 0.8), (1.0, 1.0)]:
                value = kantorovich_eval(coeffs, kernel, x)
                assert value == pytest.approx(-2.5, abs=1e-12)

    def test_ramp_reference_summation(self):
        # Exact cell averages of f(u) = u for n = 2 are (k + 1/2)/n on
        # each cell; the operator value at x = 0.5 must match an explicit
        # brute-force loop over k in {-2, -1, 0, 1}.
        n = 2
        averages = np.array([(k + 0.5) / n for k in range(-n, n)])
        coeffs = CellAverageTensor(n=n, r=1, coeffs=averages, domain=UNIT)
        value = kantorovich_eval(coeffs, "ramp", 0.5)
        oracle = naive_kantorovich(coeffs, "ramp", 0.5)
        assert value == pytest.approx(oracle, abs=1e-15)

    def test_example1_pointwise_convergence(self):
        # At the sharp bump peak (0.3, 0.5) the pointwise error tracks the
        # operator's sup error (~0.11 at n = 40) and keeps shrinking with
        # the order, dropping below 0.05 by n = 80.
        from kanops.imaging import example_field

        fld = example_field("example1")
        target = 1.0 + math.exp(-11.2)
        assert target == pytest.approx(1.0000137, abs=5e-7)
        diffs = []
        for n in (10, 20, 40, 80):
            coeffs = cell_averages(fld, n, 4)
            value = kantorovich_eval(coeffs, "tanh", (0.3, 0.5))
            diffs.append(abs(value - target))
        assert all(a > b for a, b in zip(diffs, diffs[1:]))
        assert diffs[2] < 0.12
        assert diffs[3] < 0.05

    def test_scalar_point_allowed_in_one_dimension(self):
        f = ScalarField(lambda u: u, UNIT)
        coeffs = cell_averages(f, 2, 2)
        assert kantorovich_eval(coeffs, "tanh", 0.5) == pytest.approx(
            kantorovich_eval(coeffs, "tanh", [0.5]), abs=0.0
        )

    def test_point_outside_domain_rejected(self):
        f = ScalarField(lambda u: u, UNIT)
        coeffs = cell_averages(f, 2, 2)
        with pytest.raises(ArgumentError):
            kantorovich_eval(coeffs, "tanh", 1.5)
        with pytest.raises(ArgumentError):
            kantorovich_eval(coeffs, "tanh", -0.1)

    def test_wrong_point_length_rejected(self):
        f = ScalarField(lambda u1, u2: u1 * u2, UNIT2)
        coeffs = cell_averages(f, 2, 1)
        with pytest.raises(ArgumentError):
            kantorovich_eval(coeffs, "tanh", (0.5,))

    def test_matches_naive_oracle_on_random_tensors(self):
        rng = np.random.default_rng(17)
        for trial in range(12):
            r = 1 + trial % 2
            n = int(rng.integers(1, 5))
            domain = BoxDomain.unit(r)
            coeffs = CellAverageTensor(
                n=n,
                r=r,
                coeffs=rng.uniform(-2.0, 2.0, (2 * n,) * r),
                domain=domain,
            )
            kernel = ("tanh", "logistic", "ramp", "bspline:2")[trial % 4]
            x = rng.uniform(0.0, 1.0, r)
            mine = kantorovich_eval(coeffs, kernel, x)
            oracle = naive_kantorovich(coeffs, kernel, x)
            assert mine == pytest.approx(oracle, abs=1e-12)

    def test_masked_matches_naive_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(6):
            n = int(rng.integers(1, 4))
            valid = rng.uniform(size=(2 * n, 2 * n)) > 0.3
            valid[n, n] = True  # keep at least one interior cell
            values = np.where(valid, rng.uniform(0.0, 1.0, valid.shape), 0.0)
            coeffs = CellAverageTensor(
                n=n, r=2, coeffs=values, domain=UNIT2, valid=valid
            )
            x = rng.uniform(0.3, 0.7, 2)
            mine = kantorovich_eval(coeffs, "logistic", x)
            oracle = naive_kantorovich(coeffs, "logistic", x)
            assert mine == pytest.approx(oracle, abs=1e-12)

    def test_affine_domain_mapping(self):
        box = BoxDomain((-2.0,), (6.0,))
        f = ScalarField(lambda u: u, box)
        coeffs = cell_averages(f, 3, 4)
        value = kantorovich_eval(coeffs, "tanh", 2.0)
        oracle = naive_kantorovich(coeffs, "tanh", 2.0)
        assert value == pytest.approx(oracle, abs=1e-12)
        # Convexity: the output stays inside the range of f over the box.
        assert -2.0 - 1e-10 <= value <= 6.0 + 1e-10


class TestEvaluateOnGrid:
    def test_matches_pointwise_evaluation(self):
        f = ScalarField(lambda u1, u2: np.sin(3 * u1) * u2, UNIT2)
        coeffs = cell_averages(f, 4, 2)
        values = evaluate_on_grid(coeffs, "tanh", (5, 7))
        for i2, x2 in enumerate(np.linspace(0.0, 1.0, 5)):
            for i1, x1 in enumerate(np.linspace(0.0, 1.0, 7)):
                point = kantorovich_eval(coeffs, "tanh", (x1, x2))
                assert values[i2, i1] == pytest.approx(point, abs=1e-12)

    def test_masked_matches_pointwise_evaluation(self):
        rng = np.random.default_rng(5)
        n = 3
        valid = rng.uniform(size=(2 * n, 2 * n)) > 0.4
        valid[n, n] = True
        coeffs = CellAverageTensor(
            n=n,
            r=2,
            coeffs=np.where(valid, rng.uniform(size=valid.shape), 0.0),
            domain=UNIT2,
            valid=valid,
        )
        values = evaluate_on_grid(coeffs, "logistic", (4, 6))
        for i2, x2 in enumerate(np.linspace(0.0, 1.0, 4)):
            for i1, x1 in enumerate(np.linspace(0.0, 1.0, 6)):
                point = kantorovich_eval(coeffs, "logistic", (x1, x2))
                assert values[i2, i1] == pytest.approx(point, abs=1e-12)

    def test_one_dimensional_grid(self):
        f = ScalarField(lambda u: u**2, UNIT)
        coeffs = cell_averages(f, 3, 4)
        values = evaluate_on_grid(coeffs, "ramp", (9,))
        for i, x in enumerate(np.linspace(0.0, 1.0, 9)):
            assert values[i] == pytest.approx(
                kantorovich_eval(coeffs, "ramp", x), abs=1e-13
            )

    def test_three_dimensional_consistency(self):
        f = ScalarField(
            lambda u1, u2, u3: u1 + 2.0 * u2 + 4.0 * u3, BoxDomain.unit(3)
        )
        coeffs = cell_averages(f, 2, 2)
        values = evaluate_on_grid(coeffs, "tanh", (3, 4, 5))
        assert values.shape == (3, 4, 5)
        xs1 = np.linspace(0.0, 1.0, 5)
        xs2 = np.linspace(0.0, 1.0, 4)
        xs3 = np.linspace(0.0, 1.0, 3)
        for i3, i2, i1 in [(0, 0, 0), (1, 2, 3), (2, 3, 4), (2, 1, 0)]:
            point = kantorovich_eval(
                coeffs, "tanh", (xs1[i1], xs2[i2], xs3[i3])
            )
            assert values[i3, i2, i1] == pytest.approx(point, abs=1e-12)
        # Convexity: everything stays within the field's range on the box.
        assert values.min() >= 0.0 - 1e-10
        assert values.max() <= 7.0 + 1e-10

    def test_rejects_bad_shapes(self):
        f = ScalarField(lambda u1, u2: u1 * u2, UNIT2)
        coeffs = cell_averages(f, 2, 1)
        with pytest.raises(ArgumentError):
            evaluate_on_grid(coeffs, "tanh", (5,))
        with pytest.raises(ArgumentError):
            evaluate_on_grid(coeffs, "tanh", (5, 1))


class TestApplyGrid:
    def test_zero_field(self):
        f = ScalarField(
            lambda u1, u2: np.zeros(np.broadcast(u1, u2).shape), UNIT2
        )
        out = kantorovich_apply_grid(f, "tanh", 4, 2, (6, 6))
        assert np.array_equal(out.values, np.zeros((6, 6)))

    def test_constant_field(self):
        f = ScalarField(
            lambda u1, u2: np.full(np.broadcast(u1, u2).shape, 5.0), UNIT2
        )
        for kernel in ("tanh", "logistic", "ramp", "bspline:4"):
            out = kantorovich_apply_grid(f, kernel, 3, 2, (5, 5))
            assert np.max(np.abs(out.values - 5.0)) <= 1e-12

    def test_out_shape_required(self):
        f = ScalarField(lambda u: u, UNIT)
        with pytest.raises(ArgumentError):
            kantorovich_apply_grid(f, "tanh", 2, 2)

    def test_carries_input_domain(self):
        box = BoxDomain((-1.0, -1.0), (1.0, 1.0))
        f = ScalarField(lambda u1, u2: u1 - u2, box)
        out = kantorovich_apply_grid(f, "tanh", 2, 2, (4, 4))
        assert out.domain == box


class TestOperatorProperties:
    def test_constant_reproduction_sweep(self):
        rng = np.random.default_rng(11)
        constants = rng.uniform(-10.0, 10.0, 20)
        kernels = [make_kernel(t) for t in (
            "logistic", "tanh", "ramp",
            "bspline:1", "bspline:2", "bspline:3", "bspline:4",
        )]
        for c in constants:
            f = ScalarField(
                lambda u1, u2, c=c: np.full(np.broadcast(u1, u2).shape, c),
                UNIT2,
            )
            for n in (2, 8, 32):
                coeffs = cell_averages(f, n, 1)
                for kern in kernels:
                    values = evaluate_on_grid(coeffs, kern, (9, 9))
                    assert np.max(np.abs(values - c)) <= 1e-10

    def test_range_preservation_on_piecewise_fields(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            cells = rng.uniform(-5.0, 5.0, (6, 6))
            f = step_field(cells, UNIT2)
            coeffs = cell_averages(f, 5, 2)
            lo, hi = cells.min(), cells.max()
            xs = rng.uniform(0.0, 1.0, (50, 2))
            for x in xs:
                value = kantorovich_eval(coeffs, "logistic", x)
                assert lo - 1e-10 <= value <= hi + 1e-10

    def test_norm_inequality_on_random_grids(self):
        # ||K_n f||_(2,3) <= (||psi||_1 / psi(2))^(1/2 + 1/3) ||f||_(2,3).
        kern = make_kernel("tanh")
        bound = (density_l1(kern, 8192) / kern.psi_at_2) ** (1 / 2 + 1 / 3)
        box = BoxDomain((-1.0, -1.0), (1.0, 1.0))
        P = MixedExponents((2.0, 3.0))
        rng = np.random.default_rng(29)
        for _ in range(10):
            g = GridFunction(box, rng.uniform(-1.0, 1.0, (12, 12)))
            out = kantorovich_apply_grid(g.as_field(), kern, 16, 2, (12, 12))
            lhs = mixed_lebesgue_norm(out, P)
            rhs = bound * mixed_lebesgue_norm(g, P)
            assert lhs <= rhs + 1e-6

    def test_example1_sup_error_strictly_decreasing(self, example1_runs):
        reference = example1_runs["reference"]
        sups = [
            sup_error(reference, example1_runs["approx"][n])
            for n in (10, 20, 30, 40)
        ]
        assert all(a > b for a, b in zip(sups, sups[1:]))

    def test_example_mixed_norm_errors_strictly_decreasing(
        self, example1_runs, example2_runs
    ):
        from kanops.normspaces import mixed_lebesgue_error

        for runs, P in (
            (example1_runs, MixedExponents((2.0, 3.0))),
            (example2_runs, MixedExponents((3.0, 4.0))),
        ):
            errors = [
                mixed_lebesgue_error(runs["reference"], runs["approx"][n], P)
                for n in (10, 20, 30, 40)
            ]
            assert all(a > b for a, b in zip(errors, errors[1:]))

    def test_deterministic_reevaluation(self):
        f = ScalarField(lambda u1, u2: np.cos(u1) * u2, UNIT2)
        a = kantorovich_apply_grid(f, "logistic", 6, 3, (10, 10))
        b = kantorovich_apply_grid(f, "logistic", 6, 3, (10, 10))
        assert np.array_equal(a.values, b.values)
