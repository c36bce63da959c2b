import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from jsde.errors import LevelBracketError
from jsde.model import CustomModulus, PowerModulus
from jsde.yw import ApproximationSequence, build_density, compute_levels

SQRT = PowerModulus(0.5)
LINEAR = PowerModulus(1.0)


@pytest.fixture(scope="module")
def seq_sqrt():
    return ApproximationSequence.build(SQRT, n_max=10)


class TestLevels:
    def test_sqrt_modulus_closed_form(self):
        # rung integrals telescope: log(a_{n-1}/a_n) = n, so a_n = exp(-n(n+1)/2)
        logs = compute_levels(SQRT, 10)
        for n in range(1, 11):
            want = math.exp(-n * (n + 1) / 2.0)
            assert math.exp(logs[n]) == pytest.approx(want, rel=1e-8)

    def test_linear_modulus_reciprocal_recursion(self):
        a = np.exp(compute_levels(LINEAR, 10))
        assert a[1] == pytest.approx(0.5, rel=1e-10)
        assert a[2] == pytest.approx(0.25, rel=1e-10)
        assert a[3] == pytest.approx(1.0 / 7.0, rel=1e-10)
        for n in range(1, 11):
            assert 1.0 / a[n] == pytest.approx(1.0 / a[n - 1] + n, rel=1e-10)

    def test_rung_integral_residual_independent_quadrature(self):
        # oracle: direct scipy quadrature of h**-2 over each rung
        logs = compute_levels(PowerModulus(0.75), 6)
        a = np.exp(logs)
        for n in range(1, 7):
            val, _ = integrate.quad(lambda v: PowerModulus(0.75)(v) ** -2,
                                    a[n], a[n - 1], epsrel=1e-12)
            assert val == pytest.approx(n, rel=1e-8)

    def test_degenerate_n_max(self):
        with pytest.raises(ValueError):
            compute_levels(SQRT, 0)

    def test_custom_modulus_levels(self):
        h = CustomModulus(lambda u: np.sqrt(u), name="sqrt")
        logs = compute_levels(h, 3)
        for n in (1, 2, 3):
            want = math.exp(-n * (n + 1) / 2.0)
            assert math.exp(logs[n]) == pytest.approx(want, rel=1e-7)

    def test_nondivergent_modulus_reports_partial_levels(self):
        h = CustomModulus(lambda u: np.asarray(u) ** 0.05)
        with pytest.raises(LevelBracketError) as exc:
            compute_levels(h, 10)
        assert len(exc.value.log_levels) >= 1


class TestDensities:
    def test_normalization_independent_quadrature(self, seq_sqrt):
        for dens in seq_sqrt.densities[:6]:
            lo, hi = math.exp(dens.log_lo), math.exp(dens.log_hi)
            val, _ = integrate.quad(lambda v: float(dens(v)), lo, hi,
                                    epsrel=1e-12, limit=300,
                                    points=[math.exp(dens.log_lo + dens.taper_width),
                                            math.exp(dens.log_hi - dens.taper_width)])
            assert val == pytest.approx(1.0, abs=1e-10)

    def test_pointwise_cap(self, seq_sqrt):
        # rho_n * n * h^2 <= 2 on a dense sweep
        for n, dens in enumerate(seq_sqrt.densities, start=1):
            v = np.exp(np.linspace(dens.log_lo, dens.log_hi, 10_000))
            vals = dens(v) * n * np.asarray(SQRT(v)) ** 2
            assert np.max(vals) <= 2.0 * (1 + 1e-8)

    def test_vanishes_at_support_endpoints(self, seq_sqrt):
        for dens in seq_sqrt.densities[:4]:
            assert dens(math.exp(dens.log_lo)) == 0.0
            assert dens(math.exp(dens.log_hi)) == 0.0
            assert dens(math.exp(dens.log_lo) * 0.5) == 0.0
            assert dens(math.exp(dens.log_hi) * 2.0) == 0.0

    def test_first_taper_needs_no_shrink_for_sqrt(self):
        # log-uniform rung mass: 10% tapers keep >= 0.9 of the unit mass
        logs = compute_levels(SQRT, 1)
        dens = build_density(SQRT, logs[1], logs[0], 1)
        assert dens.taper_width == pytest.approx(0.1 * (logs[0] - logs[1]))
        assert dens.kappa <= 2.0


def psi_grid(seq, n):
    a_prev = math.exp(seq.log_levels[n - 1])
    a_n = math.exp(seq.log_levels[n])
    inside = np.exp(np.linspace(seq.log_levels[n], seq.log_levels[n - 1], 2000))
    wide = np.linspace(-2.0, 2.0, 4001)
    return np.unique(np.concatenate([inside, -inside, wide, [0.0, a_n, a_prev]]))


class TestPsi:
    def test_zero_at_origin(self, seq_sqrt):
        for n in range(1, 11):
            assert seq_sqrt.psi(n, 0.0) == 0.0
            assert seq_sqrt.psi_prime(n, 0.0) == 0.0

    def test_prime_bounded_by_one(self, seq_sqrt):
        for n in range(1, 11):
            ys = psi_grid(seq_sqrt, n)
            assert np.max(np.abs(seq_sqrt.psi_prime(n, ys))) <= 1.0

    def test_prime_is_exactly_one_above_rung(self, seq_sqrt):
        for n in range(1, 11):
            a_prev = math.exp(seq_sqrt.log_levels[n - 1])
            ys = np.array([a_prev, a_prev * 1.0000001, 1.9, 2.5])
            assert np.all(seq_sqrt.psi_prime(n, ys) == 1.0)

    def test_sandwich(self, seq_sqrt):
        for n in range(1, 11):
            ys = psi_grid(seq_sqrt, n)
            v = seq_sqrt.psi(n, ys)
            a_prev = math.exp(seq_sqrt.log_levels[n - 1])
            assert np.all(v <= np.abs(ys))
            assert np.all(v >= np.abs(ys) - a_prev)

    def test_monotone_in_n(self, seq_sqrt):
        ys = psi_grid(seq_sqrt, 1)
        for n in range(1, 10):
            assert np.all(seq_sqrt.psi(n + 1, ys) >= seq_sqrt.psi(n, ys))

    def test_offset_in_range_and_linear_tail(self, seq_sqrt):
        for n in range(1, 11):
            off = seq_sqrt.psi_offset(n)
            a_prev = math.exp(seq_sqrt.log_levels[n - 1])
            assert 0.0 <= off <= a_prev
            y = a_prev + 0.37
            assert seq_sqrt.psi(n, y) == pytest.approx(y - off, rel=1e-12)

    def test_offset_independent_quadrature(self, seq_sqrt):
        # offset = integral of (1 - psi') over [0, a_{n-1}]
        for n in (1, 2, 3):
            a_prev = math.exp(seq_sqrt.log_levels[n - 1])
            val, _ = integrate.quad(
                lambda r: 1.0 - seq_sqrt.psi_prime(n, r), 0.0, a_prev,
                epsrel=1e-10, limit=400)
            assert val == pytest.approx(seq_sqrt.psi_offset(n), rel=1e-6)

    def test_even_symmetry(self, seq_sqrt):
        ys = np.linspace(1e-4, 1.5, 500)
        for n in (1, 3, 7):
            assert np.array_equal(seq_sqrt.psi(n, ys), seq_sqrt.psi(n, -ys))
            assert np.array_equal(seq_sqrt.psi_prime(n, ys),
                                  -seq_sqrt.psi_prime(n, -ys))

    def test_finite_difference_prime(self, seq_sqrt):
        delta = 1e-6
        for n in (1, 2, 3):
            ys = psi_grid(seq_sqrt, n)
            ys = ys[(np.abs(ys) > 10 * delta)]
            # stay clear of the support endpoints where curvature jumps
            for edge in np.exp(seq_sqrt.log_levels):
                ys = ys[np.abs(np.abs(ys) - edge) > 10 * delta]
            fd = (seq_sqrt.psi(n, ys + delta) - seq_sqrt.psi(n, ys - delta)) \
                / (2 * delta)
            assert np.max(np.abs(fd - seq_sqrt.psi_prime(n, ys))) < 1e-5

    def test_finite_difference_second(self, seq_sqrt):
        delta = 1e-6
        for n in (1, 2):
            dens = seq_sqrt.densities[n - 1]
            lo, hi = math.exp(dens.log_lo), math.exp(dens.log_hi)
            ys = np.exp(np.linspace(dens.log_lo, dens.log_hi, 500))[5:-5]
            breaks = [lo, hi, math.exp(dens.log_lo + dens.taper_width),
                      math.exp(dens.log_hi - dens.taper_width)]
            for edge in breaks:
                ys = ys[np.abs(ys - edge) > 10 * delta]
            fd = (seq_sqrt.psi_prime(n, ys + delta)
                  - seq_sqrt.psi_prime(n, ys - delta)) / (2 * delta)
            second = seq_sqrt.psi_second(n, ys)
            scale = np.maximum(1.0, np.abs(second))
            assert np.max(np.abs(fd - second) / scale) < 1e-3

    def test_second_is_density(self, seq_sqrt):
        for n in (1, 4):
            dens = seq_sqrt.densities[n - 1]
            ys = np.exp(np.linspace(dens.log_lo, dens.log_hi, 300))
            assert np.array_equal(seq_sqrt.psi_second(n, ys), dens(ys))

    def test_level_index_validated(self, seq_sqrt):
        with pytest.raises(ValueError):
            seq_sqrt.psi(0, 0.5)
        with pytest.raises(ValueError):
            seq_sqrt.psi(11, 0.5)

    @given(st.floats(min_value=-3.0, max_value=3.0,
                     allow_nan=False, allow_infinity=False),
           st.integers(min_value=1, max_value=10))
    @settings(max_examples=200, deadline=None)
    def test_sandwich_property(self, y, n):
        seq = _CACHED_SEQ
        v = seq.psi(n, y)
        a_prev = math.exp(seq.log_levels[n - 1])
        assert abs(y) - a_prev <= v <= abs(y)


_CACHED_SEQ = ApproximationSequence.build(SQRT, n_max=10)


class TestOtherModuli:
    @pytest.mark.parametrize("gamma", [0.5, 0.75, 1.0])
    def test_invariants_across_families(self, gamma):
        mod = PowerModulus(gamma)
        seq = ApproximationSequence.build(mod, n_max=10)
        for n in range(1, 11):
            ys = psi_grid(seq, n)
            p = seq.psi_prime(n, ys)
            v = seq.psi(n, ys)
            s = seq.psi_second(n, ys)
            a_prev = math.exp(seq.log_levels[n - 1])
            assert np.max(np.abs(p)) <= 1.0
            assert np.all(v <= np.abs(ys))
            assert np.all(v >= np.abs(ys) - a_prev)
            with np.errstate(divide="ignore"):
                cap = 2.0 / (n * np.asarray(mod(np.abs(ys))) ** 2)
            assert np.all(s <= cap * (1 + 1e-8) + 1e-300)
            assert np.all(s >= 0.0)
