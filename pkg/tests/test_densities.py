import json
import math

import numpy as np
import pytest

from sparsedist.densities import (
    from_json,
    location_scale_from_name,
    make_beta_gaussian,
    make_location_scale,
    make_sparse_integer_gaussian,
    make_sparse_poisson,
    make_triangular,
    make_truncated_gaussian,
    make_truncated_parabola,
    make_truncated_paraboloid,
    mean_variance,
    pdf,
    support_quadrature_1d,
    support_quadrature_2d,
    to_json,
    tsallis_negentropy,
    wasserstein2,
)
from sparsedist.numerics import Interval, integrate
from sparsedist.tsallis import sparsemax

FIG4_SIGMA = np.array([[0.6, 0.4], [0.4, 0.48]])


def random_spd(rng, n, jitter=0.3):
    a = rng.normal(size=(n, n))
    return a @ a.T + jitter * np.eye(n)


def quad_mass_1d(params, tol=1e-10):
    sup = params.support
    return integrate(lambda t: params.pdf_one(t), Interval(sup.lo, sup.hi), tol=tol)


class TestBetaGaussianConstruction:
    def test_standard_parabola(self):
        p = make_beta_gaussian(2.0, [0.0], [[1.0]])
        assert p.radius == pytest.approx(1.5 ** (1.0 / 3.0), rel=1e-14)
        assert p.tau == pytest.approx(-0.5 * 1.5 ** (2.0 / 3.0), rel=1e-13)
        assert p.tau == pytest.approx(-0.6551853485522242, abs=1e-14)

    def test_gaussian_limit(self):
        p = make_beta_gaussian(1.01, [0.0], [[1.0]])
        assert p.radius > 10.0
        for t in np.linspace(-3.0, 3.0, 31):
            gauss = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
            assert abs(p.pdf_one(t) - gauss) < 2e-2

    def test_bivariate_fig4_scale(self):
        p = make_beta_gaussian(2.0, [0.0, 0.0], FIG4_SIGMA)
        # tau from the Gamma formula with Gamma(N/2 + 2) = Gamma(3) = 2
        expected = -(2.0 / math.sqrt((2.0 * math.pi) ** 2 * 0.128)) ** 0.5
        assert p.tau == pytest.approx(expected, rel=1e-12)
        pts, ws = support_quadrature_2d(p, 64, 256)
        mass = float(np.sum(ws * np.array([p.pdf_one(t) for t in pts])))
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            make_beta_gaussian(0.5, [0.0], [[1.0]])
        with pytest.raises(ValueError):
            make_beta_gaussian(2.5, [0.0], [[1.0]])

    def test_rejects_non_spd(self):
        with pytest.raises(ValueError):
            make_beta_gaussian(2.0, [0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])


class TestPdf:
    def test_parabola_peak(self):
        p = make_truncated_parabola(0.0, 1.0)
        assert p.pdf_one(0.0) == pytest.approx(-p.tau, rel=1e-14)
        assert p.pdf_one(0.0) == pytest.approx(0.5 * 1.5 ** (2.0 / 3.0), rel=1e-14)

    def test_triangular_peak(self):
        tri = make_triangular(0.0, 1.0)
        assert tri.tau == -1.0
        assert tri.pdf_one(0.0) == pytest.approx(1.0, abs=1e-15)
        assert tri.support.lo == pytest.approx(-1.0) and tri.support.hi == pytest.approx(1.0)

    def test_zero_outside_ellipsoid(self):
        p = make_beta_gaussian(1.5, [0.0, 0.0], np.eye(2))
        far = np.array([10.0, 0.0])
        assert not p.support.contains(far)
        assert p.pdf_one(far) == 0.0

    def test_vectorized_eval(self):
        p = make_truncated_parabola(0.0, 1.0)
        vals = pdf(p, np.linspace(-2.0, 2.0, 9))
        assert vals.shape == (9,)
        assert vals[0] == 0.0 and vals[4] > 0.0

    def test_vectorized_eval_2d(self):
        p = make_beta_gaussian(2.0, [0.0, 0.0], FIG4_SIGMA)
        pts = np.array([[0.0, 0.0], [5.0, 5.0]])
        vals = pdf(p, pts)
        assert vals.shape == (2,)
        assert vals[0] > 0.0 and vals[1] == 0.0


class TestParaboloid:
    def test_reduces_to_parabola(self):
        p1 = make_truncated_paraboloid([0.0], [[1.0]])
        assert p1.tau == pytest.approx(-0.5 * 1.5 ** (2.0 / 3.0), rel=1e-13)

    def test_isotropic_2d(self):
        p = make_truncated_paraboloid([0.0, 0.0], np.eye(2))
        assert p.tau == pytest.approx(-math.sqrt(1.0 / math.pi), rel=1e-13)
        pts, ws = support_quadrature_2d(p, 64, 256)
        mass = float(np.sum(ws * np.array([p.pdf_one(t) for t in pts])))
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_matches_beta_gaussian_route(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = int(rng.integers(1, 3))
            mu = rng.normal(size=n)
            sigma = random_spd(rng, n)
            via_gamma = make_truncated_paraboloid(mu, sigma)
            via_radius = make_beta_gaussian(2.0, mu, sigma)
            assert via_gamma.tau == pytest.approx(via_radius.tau, rel=1e-12)
            assert via_gamma.radius == pytest.approx(via_radius.radius, rel=1e-12)


class TestLocationScale:
    def test_triangular_case(self):
        ls = location_scale_from_name("abs", 0.0, 1.0)  # b = sigma^2 = 1
        assert ls.a == pytest.approx(1.0, abs=1e-12)
        assert ls.tau == pytest.approx(-1.0, abs=1e-12)

    def test_parabola_case(self):
        ls = location_scale_from_name("parabola", 0.0, 1.0)
        assert ls.a == pytest.approx(1.5 ** (1.0 / 3.0), rel=1e-12)
        # a g'(a) - g(a) = a^3/3 = 1/2
        assert ls.a**3 / 3.0 == pytest.approx(0.5, abs=1e-12)

    def test_truncated_gaussian_case(self):
        tg = make_truncated_gaussian(2.0, 0.0, 1.0)
        # a solves erf(a/sqrt 2) = 1/kappa + 2 a N(a; 0, 1)
        lhs = math.erf(tg.a / math.sqrt(2.0))
        rhs = 0.5 + 2.0 * tg.a * math.exp(-0.5 * tg.a**2) / math.sqrt(2.0 * math.pi)
        assert lhs == pytest.approx(rhs, abs=1e-12)
        assert quad_mass_1d(tg) == pytest.approx(1.0, abs=1e-9)
        generic = location_scale_from_name("scaled_gaussian", 0.0, 1.0, kappa=2.0)
        assert generic.tau == pytest.approx(tg.tau, rel=1e-12)

    def test_kappa_at_or_below_one_rejected(self):
        with pytest.raises(ValueError):
            make_truncated_gaussian(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            make_truncated_gaussian(0.7, 0.0, 1.0)

    def test_weakly_convex_score_fails(self):
        # g linear: a g'(a) - g(a) + g(0) stays 0, no root to bracket
        with pytest.raises(ValueError):
            make_location_scale(lambda u: u, lambda u: 1.0, 0.0, 1.0)


class TestSparseInteger:
    def test_integer_gaussian_symmetric(self):
        sg = make_sparse_integer_gaussian(3.0)
        pts = sg.support_points()
        masses = np.array([sg.pmf(t) for t in pts])
        assert masses.sum() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(masses, masses[::-1], atol=1e-14)
        assert sg.mean() == pytest.approx(3.0, abs=1e-12)
        assert sg.pmf(3) == masses.max()

    def test_poisson_matches_wide_window(self):
        sp = make_sparse_poisson(1.0)
        total = sum(sp.pmf(t) for t in sp.support_points())
        assert total == pytest.approx(1.0, abs=1e-12)
        # brute-force sparsemax over [0, 50]
        scores = np.array([t * math.log(1.0) - math.lgamma(t + 1.0) for t in range(51)])
        brute = sparsemax(scores)
        for t in range(51):
            assert sp.pmf(t) == pytest.approx(brute[t], abs=1e-12)

    def test_poisson_larger_mean(self):
        sp = make_sparse_poisson(6.5)
        total = sum(sp.pmf(t) for t in sp.support_points())
        assert total == pytest.approx(1.0, abs=1e-12)
        assert sp.t_min >= 0

    def test_pmf_zero_off_integers(self):
        sg = make_sparse_integer_gaussian(0.0)
        assert sg.pmf(0.5) == 0.0

    def test_mu_validation(self):
        with pytest.raises(ValueError):
            make_sparse_poisson(0.0)


class TestMoments:
    def test_epanechnikov_variance(self):
        p = make_beta_gaussian(2.0, [0.0], [[2.0 / 3.0]])
        _, var = mean_variance(p)
        assert var[0, 0] == pytest.approx(0.2, rel=1e-13)

    def test_gaussian_variance_is_sigma(self):
        sigma = np.array([[1.3, 0.2], [0.2, 0.9]])
        p = make_beta_gaussian(1.0, [0.5, -0.5], sigma)
        m, var = mean_variance(p)
        np.testing.assert_allclose(var, sigma, atol=1e-15)
        np.testing.assert_allclose(m, [0.5, -0.5])

    def test_elegant_variance_formula(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(1, 3))
            alpha = rng.uniform(1.05, 2.0)
            sigma = random_spd(rng, n)
            p = make_beta_gaussian(alpha, rng.normal(size=n), sigma)
            _, var = mean_variance(p)
            predicted = (1.0 / alpha + (alpha - 1.0) * tsallis_negentropy(p)) * sigma
            np.testing.assert_allclose(var, predicted, atol=1e-10)

    def test_variance_against_quadrature(self):
        p = make_beta_gaussian(2.0, [0.0], [[2.0 / 3.0]])
        sup = p.support
        second = integrate(lambda t: t * t * p.pdf_one(t), Interval(sup.lo, sup.hi), tol=1e-11)
        assert second == pytest.approx(0.2, abs=1e-10)


class TestNegentropyClosedForms:
    def test_triangular(self):
        assert tsallis_negentropy(make_triangular(0.0, 1.0)) == pytest.approx(-1.0 / 6.0, rel=1e-14)
        b = 2.7
        assert tsallis_negentropy(make_triangular(1.0, b)) == pytest.approx(
            -0.5 + 1.0 / (3.0 * math.sqrt(b)), rel=1e-13)

    def test_parabola(self):
        val = tsallis_negentropy(make_truncated_parabola(0.0, 1.0))
        assert val == pytest.approx(-0.5 + 0.2 * 1.5 ** (2.0 / 3.0), rel=1e-13)

    def test_closed_form_vs_quadrature(self):
        rng = np.random.default_rng(12)
        for _ in range(8):
            alpha = rng.uniform(1.2, 2.0)
            p = make_beta_gaussian(alpha, [rng.normal()], [[rng.uniform(0.4, 2.0)]])
            ts, ws = support_quadrature_1d(p, 400)
            pv = np.array([p.pdf_one(t) for t in ts])
            quad_val = (np.sum(ws * pv**alpha) - 1.0) / (alpha * (alpha - 1.0))
            assert tsallis_negentropy(p) == pytest.approx(quad_val, abs=1e-8)


class TestWasserstein:
    def test_identical_is_zero(self):
        p = make_beta_gaussian(1.5, [0.1, 0.2], FIG4_SIGMA)
        assert wasserstein2(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_pure_location_shift(self):
        p1 = make_beta_gaussian(2.0, [0.0], [[1.0]])
        p2 = make_beta_gaussian(2.0, [1.0], [[1.0]])
        assert wasserstein2(p1, p2) == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_frechet(self):
        p1 = make_beta_gaussian(1.0, [0.0], [[1.0]])
        p2 = make_beta_gaussian(1.0, [0.0], [[4.0]])  # std 1 vs 2
        assert wasserstein2(p1, p2) == pytest.approx(1.0, rel=1e-12)

    def test_alpha_mismatch(self):
        with pytest.raises(ValueError):
            wasserstein2(make_beta_gaussian(1.5, [0.0], [[1.0]]),
                         make_beta_gaussian(2.0, [0.0], [[1.0]]))


class TestInvariants:
    def test_normalization_1d(self):
        rng = np.random.default_rng(13)
        families = []
        for _ in range(6):
            families.append(make_beta_gaussian(rng.uniform(1.1, 2.0),
                                               [rng.normal()], [[rng.uniform(0.3, 2.5)]]))
        families.append(make_triangular(rng.normal(), rng.uniform(0.5, 3.0)))
        families.append(make_truncated_gaussian(rng.uniform(1.3, 4.0), rng.normal(), 1.0))
        families.append(location_scale_from_name("parabola", 0.0, rng.uniform(0.5, 1.5)))
        for params in families:
            assert quad_mass_1d(params) == pytest.approx(1.0, abs=1e-9)

    def test_normalization_discrete(self):
        for mu in (0.3, 1.0, 2.5, 7.7):
            sp = make_sparse_poisson(mu)
            assert sum(sp.pmf(t) for t in sp.support_points()) == pytest.approx(1.0, abs=1e-12)
        for mu in (-2.3, 0.0, 3.0, 10.6):
            sg = make_sparse_integer_gaussian(mu)
            assert sum(sg.pmf(t) for t in sg.support_points()) == pytest.approx(1.0, abs=1e-12)

    def test_support_exactness(self):
        rng = np.random.default_rng(14)
        cases = [
            make_beta_gaussian(1.5, [0.2], [[0.8]]),
            make_triangular(0.5, 1.5),
            make_truncated_gaussian(2.0, -0.3, 0.7),
            make_beta_gaussian(2.0, [0.0, 0.0], FIG4_SIGMA),
        ]
        for params in cases:
            sup = params.support
            for _ in range(10_000):
                if params.dim == 1:
                    t = rng.uniform(-4.0, 4.0)
                else:
                    t = rng.uniform(-3.0, 3.0, size=2)
                assert (params.pdf_one(t) > 0.0) == sup.contains(t)

    def test_equivariance_under_orthogonal_maps(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            u_mat = np.array([[math.cos(angle), -math.sin(angle)],
                              [math.sin(angle), math.cos(angle)]])
            if rng.random() < 0.5:
                u_mat[:, 0] *= -1.0  # reflection, still orthogonal
            shift = rng.normal(size=2)
            mu = rng.normal(size=2)
            sigma = random_spd(rng, 2)
            alpha = rng.uniform(1.1, 2.0)
            base = make_beta_gaussian(alpha, mu, sigma)
            moved = make_beta_gaussian(alpha, u_mat @ mu + shift, u_mat @ sigma @ u_mat.T)
            for _ in range(20):
                t = rng.normal(size=2)
                assert moved.pdf_one(u_mat @ t + shift) == pytest.approx(
                    base.pdf_one(t), abs=1e-12)

    def test_alpha_continuity_near_one(self):
        p = make_beta_gaussian(1.001, [0.0], [[1.0]])
        for t in np.linspace(-3.0, 3.0, 61):
            gauss = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
            assert abs(p.pdf_one(t) - gauss) < 2e-2


class TestJsonRoundTrip:
    @pytest.mark.parametrize("params", [
        make_beta_gaussian(1.5, [0.1, -0.2], FIG4_SIGMA),
        make_beta_gaussian(1.0, [0.0], [[1.7]]),
        make_truncated_paraboloid([0.3], [[0.9]]),
        make_triangular(0.2, 1.4),
        make_truncated_gaussian(2.5, 0.1, 1.2),
        location_scale_from_name("parabola", 0.0, 1.1),
        make_sparse_poisson(2.0),
        make_sparse_integer_gaussian(1.3),
    ], ids=lambda p: p.family)
    def test_bit_stable(self, params):
        blob = json.dumps(to_json(params))
        rebuilt = from_json(json.loads(blob))
        assert json.dumps(to_json(rebuilt)) == blob
        if getattr(params, "tau", None) is not None:
            assert rebuilt.tau == params.tau  # bitwise

    def test_custom_callable_not_serializable(self):
        custom = make_location_scale(lambda u: u**4 / 12.0, lambda u: u**3 / 3.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            to_json(custom)

    def test_tau_tamper_detected(self):
        blob = to_json(make_triangular(0.0, 1.0))
        blob["tau"] = -0.9
        with pytest.raises(ValueError):
            from_json(blob)
