"""Numerical helpers, the counter based generator and the report writers."""

import json

import numpy as np
import pytest

from modbase import InvalidArgumentError
from tools import numerics, rng, report


class TestNumerics:

    def test_periodic_trapezoid_spectral(self):
        theta = numerics.periodic_grid(64)
        np.testing.assert_allclose(numerics.periodic_trapezoid(np.cos(theta) ** 2), np.pi, atol=1e-13)

    def test_periodic_grid_excludes_endpoint(self):
        grid = numerics.periodic_grid(8)
        assert grid[0] == 0.0
        assert grid[-1] < numerics.TWO_PI

    @pytest.mark.parametrize("grid_points", [15, 17, 2.5, 8])
    def test_check_grid_rejects(self, grid_points):
        with pytest.raises(InvalidArgumentError):
            numerics.check_grid(grid_points, 16, "Test")

    def test_check_grid_odd_allowed(self):
        assert numerics.check_grid(257, 257, "Test", even=False) == 257

    @pytest.mark.parametrize("h", [0.0, -1e-4, 2e-3])
    def test_check_step_rejects(self, h):
        with pytest.raises(InvalidArgumentError):
            numerics.check_step(h, "Test")

    def test_derivatives(self):
        x = 0.7
        np.testing.assert_allclose(numerics.derivative(np.sin, x), np.cos(x), atol=1e-8)
        np.testing.assert_allclose(numerics.derivative(np.sin, x, richardson=True), np.cos(x), atol=1e-10)
        np.testing.assert_allclose(numerics.second_derivative(np.sin, x), -np.sin(x), atol=1e-6)

    def test_closed_romberg(self):
        value = numerics.closed_romberg(np.exp, 0.0, 1.0, 64)
        np.testing.assert_allclose(value, np.e - 1.0, rtol=1e-13)

    def test_rk4_harmonic(self):
        grid, states = numerics.rk4(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 0.0, numerics.TWO_PI, 2049)
        assert states.shape == (2049, 2)
        np.testing.assert_allclose(states[:, 0], np.cos(grid), atol=1e-10)


class TestRng:

    def test_uniform_definition(self):
        raw = rng.bit_generator(7, 0).random_raw(16)
        expected = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        np.testing.assert_array_equal(rng.uniforms(7, 0, 16), expected)

    def test_uniform_range(self):
        u = rng.uniforms(123, 5, 10000)
        assert u.min() >= 0.0
        assert u.max() < 1.0

    def test_deterministic(self):
        np.testing.assert_array_equal(rng.uniforms(42, 3, 100), rng.uniforms(42, 3, 100))

    def test_streams_differ(self):
        assert not np.array_equal(rng.uniforms(42, 1, 100), rng.uniforms(42, 2, 100))

    def test_zero_cells_never_drawn(self):
        counts = rng.categorical_counts([0.0, 0.0, 0.5, 0.5], 5000, seed=1)
        assert counts[0] == 0 and counts[1] == 0
        assert counts.sum() == 5000

    def test_first_cell_with_u_below_cdf(self):
        p = [0.1, 0.2, 0.3, 0.4]
        u = rng.uniforms(9, 0, 1000)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        expected = np.bincount([int(np.argmax(x < cdf)) for x in u], minlength=4)
        np.testing.assert_array_equal(rng.categorical_counts(p, 1000, seed=9), expected)

    @pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5])
    def test_seed_range(self, seed):
        with pytest.raises(InvalidArgumentError):
            rng.check_seed(seed)

    def test_largest_seed(self):
        assert rng.check_seed(2 ** 64 - 1) == 2 ** 64 - 1
        assert len(rng.uniforms(2 ** 64 - 1, 0, 4)) == 4


class TestReport:

    def test_seventeen_digits(self):
        assert report.format_float(0.1) == "0.10000000000000001"
        assert report.format_float(2.0) == "2.0"
        assert report.format_float(np.inf) == "null"

    def test_non_finite_values_are_null(self):
        text = report.dumps({"std_error": np.inf, "x": float("nan"), "y": -np.inf})
        assert "Infinity" not in text and "NaN" not in text
        assert json.loads(text) == {"std_error": None, "x": None, "y": None}
        lines = report.dumps_csv([{"std_error": np.inf, "M": 3}]).splitlines()
        assert lines[1] == ",3"

    def test_json_round_trip(self):
        values = [np.pi, 1.0 / 3.0, 1e-300, -2.5e17, 0.0]
        record = {"a": values, "b": {"n": 2, "ok": True, "none": None, "name": "mle"}}
        parsed = json.loads(report.dumps(record))
        assert parsed["a"] == values
        assert parsed["b"] == {"n": 2, "ok": True, "none": None, "name": "mle"}

    def test_numpy_scalars(self):
        parsed = json.loads(report.dumps({"x": np.float64(0.25), "k": np.int64(3), "flag": np.bool_(False)}))
        assert parsed == {"x": 0.25, "k": 3, "flag": False}

    def test_error_line(self):
        text = report.dumps_line({"error": "domain", "module": "EPR Model", "message": "P = 0", "cell": 0})
        assert text.count("\n") == 1
        assert json.loads(text)["cell"] == 0

    def test_csv(self):
        text = report.dumps_csv([{"theta": 0.5, "g": 1.0}, {"theta": 1.5, "g": 4.0}])
        lines = text.splitlines()
        assert lines[0] == "theta,g"
        assert lines[1] == "0.5,1.0"
        assert float(lines[2].split(",")[0]) == 1.5
