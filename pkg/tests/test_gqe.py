"""Structure residuals, family closures, transforms, wedge invariant."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gqelab import gqe
from gqelab.fields import ScalarFieldRn
from gqelab.gqe import (DegenerateStructureError, GQEStructure,
                        fit_lambda_by_trace, phi_from_v, radial_closure,
                        residual_at, traceless_identity_gap,
                        transformed_residual_at, translation_closure,
                        wedge_invariant_at)
from gqelab.numerics import central_d1
from gqelab.profiles import constant, parse_profile
from gqelab.verification import (GridSpec, build_radial_bundle, catalog_bundles,
                                 example_bundle, structure_grid,
                                 _transform_base)

# printed closed forms for the three worked examples, used as references
def example1_reference(n, c):
    nu = lambda r: (n * r**2 - 2 * c * r - 2 * r**2 - n + 2) / c**2
    lam = lambda r: 4 * math.exp(-r**2) * r * (-n * r**2 + c * r + 2 * r**2 - n) \
        + 2 * c * math.exp(-r**2)
    S = lambda r: -4 * (n - 1) * math.exp(-r**2) * r * (n * r**2 - 2 * r**2 + n + 2)
    return nu, lam, S


def example2_reference(n, c):
    nu = lambda r: 2.0 * (n - 2 - c * (1 + r)) / (c**2 * (1 + r) ** 2)
    lam = lambda r: 4.0 * (c * r * (1 + r) - 2 * r * (n - 2) - n + 1) / (1 + r) ** 4 \
        + 2 * c / (1 + r) ** 2
    S = lambda r: 4.0 * (n - 1) * (4 * r - 2 * n * r - n) / (1 + r) ** 4
    return nu, lam, S


def example3_reference(n, a):
    def nu(u):
        return 2.0 * (1 - (n - 2) * math.tanh(u)) / (math.cosh(u) ** 2 * (1 + math.tanh(u)))

    def lam(u):
        t = math.tanh(u)
        return a / math.cosh(u) ** 2 * ((n - 3) * t**2 - 3 * t - n)

    def S(u):
        t = math.tanh(u)
        return a * (n - 1) / math.cosh(u) ** 2 * ((n - 4) * t**2 - 4 * t - n)

    return nu, lam, S


def rel_gap(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-12)


class TestResidual:
    def test_flat_gaussian_is_exact(self):
        b = example_bundle(0, 3, 1.0)
        rng = np.random.default_rng(0)
        for _ in range(10):
            x = rng.uniform(-2, 2, size=3)
            assert residual_at(b.structure, x).max_abs() == 0.0

    def test_example1_point(self):
        b = example_bundle(1, 3, 1.0)
        assert residual_at(b.structure, [1.0, 0.0, 0.0]).max_abs() <= 1e-9

    def test_lambda_shift_shows_up_as_minus_g(self):
        b = example_bundle(1, 3, 1.0)
        broken = b.structure.with_lambda_offset(1.0)
        got = residual_at(broken, [1.0, 0.0, 0.0]).mat
        assert np.allclose(got, -math.e * np.eye(3), rtol=1e-9)


class TestRadialClosure:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_example1_matches_printed_forms(self, n):
        c = 1.0
        nu_p, lam_p, s_p = radial_closure(parse_profile("exp(-r^2/2)", "r"),
                                          parse_profile("r", "r"), n)
        nu_ref, lam_ref, s_ref = example1_reference(n, c)
        for r in np.logspace(-2, math.log10(9.0), 50):
            assert rel_gap(nu_p.value(r), nu_ref(r)) <= 1e-12
            assert rel_gap(lam_p.value(r), lam_ref(r)) <= 1e-12
            assert rel_gap(s_p.value(r), s_ref(r)) <= 1e-12

    def test_example1_pinned_point(self):
        b = example_bundle(1, 3, 1.0)
        assert b.nu_profile.value(1.0) == pytest.approx(-2.0, abs=1e-13)
        assert b.lam_profile.value(1.0) == pytest.approx(-10.0 / math.e, rel=1e-13)
        assert b.s_profile.value(1.0) == pytest.approx(-48.0 / math.e, rel=1e-13)

    def test_example2_pinned_point(self):
        b = example_bundle(2, 3, 1.0)
        assert b.nu_profile.value(0.0) == pytest.approx(0.0, abs=1e-14)
        assert b.lam_profile.value(0.0) == pytest.approx(-6.0, abs=1e-13)
        assert b.s_profile.value(0.0) == pytest.approx(-24.0, abs=1e-13)

    def test_flat_gaussian_closure(self):
        c = 1.5
        nu_p, lam_p, s_p = radial_closure(constant(1.0),
                                          parse_profile(f"{c!r}*r", "r"), 4)
        for r in (0.1, 1.0, 3.0):
            assert nu_p.value(r) == 0.0
            assert lam_p.value(r) == pytest.approx(2.0 * c)
            assert s_p.value(r) == 0.0

    def test_vanishing_fprime_is_an_error(self):
        nu_p, _, _ = radial_closure(constant(1.0), parse_profile("r^2", "r"), 3)
        with pytest.raises(DegenerateStructureError, match="stationary"):
            nu_p.value(0.0)


class TestTranslationClosure:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_example3_matches_printed_forms(self, n):
        alpha = np.zeros(n)
        alpha[0] = 1.0
        nu_p, lam_p, s_p = translation_closure(parse_profile("1+tanh(u)", "u"),
                                               parse_profile("u", "u"), alpha)
        nu_ref, lam_ref, s_ref = example3_reference(n, 1.0)
        for u in np.linspace(-3.0, 3.0, 50):
            assert rel_gap(nu_p.value(u), nu_ref(u)) <= 1e-12
            assert rel_gap(lam_p.value(u), lam_ref(u)) <= 1e-12
            assert rel_gap(s_p.value(u), s_ref(u)) <= 1e-12

    def test_example3_pinned_point(self):
        b = example_bundle(3, 3)
        assert b.nu_profile.value(0.0) == pytest.approx(2.0, abs=1e-13)
        assert b.lam_profile.value(0.0) == pytest.approx(-3.0, abs=1e-13)
        assert b.s_profile.value(0.0) == pytest.approx(-6.0, abs=1e-13)

    def test_half_space_pair(self):
        alpha = np.array([0.0, 0.0, 1.0])
        prof = parse_profile("u", "u", domain=(0.0, math.inf))
        nu_p, lam_p, s_p = translation_closure(prof, prof, alpha)
        assert nu_p.value(1.0) == pytest.approx(2.0)
        assert lam_p.value(1.0) == pytest.approx(-3.0)
        for u in (0.3, 1.0, 2.5):
            assert s_p.value(u) == pytest.approx(-6.0)

    def test_scaled_direction_enters_through_a(self):
        alpha = np.array([1.0, 2.0, 2.0])  # a = 9
        nu_p, lam_p, s_p = translation_closure(parse_profile("1+tanh(u)", "u"),
                                               parse_profile("u", "u"), alpha)
        nu_ref, lam_ref, s_ref = example3_reference(3, 9.0)
        for u in (-1.0, 0.0, 0.8):
            assert rel_gap(nu_p.value(u), nu_ref(u)) <= 1e-12
            assert rel_gap(lam_p.value(u), lam_ref(u)) <= 1e-12
            assert rel_gap(s_p.value(u), s_ref(u)) <= 1e-12

    def test_trivial_pair(self):
        nu_p, lam_p, s_p = translation_closure(constant(1.0),
                                               parse_profile("u", "u"),
                                               np.array([1.0, 0.0, 0.0]))
        assert (nu_p.value(0.3), lam_p.value(0.3), s_p.value(0.3)) == (0.0, 0.0, 0.0)

    def test_zero_direction_rejected(self):
        with pytest.raises(DegenerateStructureError):
            translation_closure(constant(1.0), parse_profile("u", "u"),
                                np.zeros(3))


class TestFamilySoundness:
    """Closure-assembled structures solve the defining equation on the grid."""

    @pytest.mark.parametrize("n", [3, 5])
    def test_catalog_residuals(self, n):
        rng = np.random.default_rng(23)
        for bundle in catalog_bundles(n):
            pts, _ = structure_grid(bundle, rng)
            gaps = [residual_at(bundle.structure, x).max_abs() for _, x in pts[:200]]
            assert max(gaps) <= 1e-8, bundle.name

    def test_fresh_pair_also_closes(self):
        phi = parse_profile("2+tanh(r)", "r")
        f = parse_profile("r+log(1+r)", "r", domain=(-1.0, math.inf))
        bundle = build_radial_bundle("fresh", phi, f, 4, GridSpec(hi=6.0))
        rng = np.random.default_rng(5)
        pts, _ = structure_grid(bundle, rng)
        gaps = [residual_at(bundle.structure, x).max_abs() for _, x in pts[:200]]
        assert max(gaps) <= 1e-8

    def test_lambda_trace_fit_matches_closure(self):
        rng = np.random.default_rng(29)
        for bundle in catalog_bundles(3):
            s = bundle.structure
            pts, _ = structure_grid(bundle, rng)
            for _, x in pts[::40]:
                fitted = fit_lambda_by_trace(s.phi, s.f, s.nu, x)
                assert abs(fitted - s.lam.value(x)) <= 1e-9 * (
                    1.0 + abs(fitted) + abs(s.lam.value(x)))


class TestWedgeInvariant:
    def test_family_structures_give_exact_zero(self):
        rng = np.random.default_rng(31)
        for bundle in catalog_bundles(3):
            pts, _ = structure_grid(bundle, rng)
            for _, x in pts[::37]:
                assert wedge_invariant_at(bundle.structure, x) <= 1e-12

    def test_constructed_counterexample(self):
        s = GQEStructure(
            3,
            ScalarFieldRn.radial(constant(1.0), 3),
            ScalarFieldRn.explicit(lambda y: float(y[0] + y[1] ** 2), 3),
            ScalarFieldRn.explicit(lambda y: float(y[2]), 3),
            ScalarFieldRn.explicit(lambda y: 0.0, 3),
        )
        got = wedge_invariant_at(s, np.array([0.0, 1.0, 0.0]))
        assert got == pytest.approx(8.0, abs=1e-6)

    def test_dimension_guard(self):
        b = example_bundle(1, 3, 1.0)
        with pytest.raises(ValueError, match="point has shape"):
            wedge_invariant_at(b.structure, np.array([1.0, 0.0]))


class TestPhiTransform:
    def test_zero_v_gives_linear_phi(self):
        pt = phi_from_v(constant(0.0), 1.0, 0.0, 0.0)
        for t in (-1.0, 0.3, 2.0):
            assert pt.phi_of_t.value(t) == pytest.approx(t, abs=1e-12)

    def test_constant_v_closed_form(self):
        pt = phi_from_v(constant(1.0), 1.0, 1.0, 0.0)
        assert pt.phi_of_t.value(1.0) == pytest.approx(2.0 - math.exp(-1.0), abs=1e-10)

    def test_exponential_case(self):
        # v = -1/(n-2) at n = 4 integrates to phi(t) = e^(t/2)
        pt = phi_from_v(constant(-0.5), 0.5, 1.0, 0.0)
        for t in (0.5, 1.0, 2.0):
            assert pt.phi_of_t.value(t) == pytest.approx(math.exp(t / 2.0), abs=1e-10)

    def test_ode_residual_by_finite_differences(self):
        b = example_bundle(1, 3, 1.0)
        pt = phi_from_v(b.v_profile, 1.0, 0.0, _transform_base(b))
        for t in np.linspace(0.1, 2.5, 100):
            dphi_fd = central_d1(pt.phi_of_t.value, float(t), 1e-5)
            assert abs(dphi_fd - pt.phiprime_of_t.value(float(t))) <= 1e-8 * (
                1.0 + abs(dphi_fd))
            dpp_fd = central_d1(pt.phiprime_of_t.value, float(t), 1e-5)
            ode = dpp_fd + b.v_profile.value(float(t)) * pt.phiprime_of_t.value(float(t))
            assert abs(ode) <= 1e-8 * (1.0 + abs(dpp_fd))

    def test_phiprime_keeps_the_sign_of_c1(self):
        b = example_bundle(1, 3, 1.0)
        for c1 in (2.0, -0.5):
            pt = phi_from_v(b.v_profile, c1, 0.0, 1.0)
            for t in np.linspace(0.2, 2.0, 100):
                assert math.copysign(1.0, pt.phiprime_of_t.value(float(t))) == \
                    math.copysign(1.0, c1)

    def test_degenerate_c1_rejected(self):
        with pytest.raises(DegenerateStructureError):
            phi_from_v(constant(1.0), 0.0, 1.0)

    def test_invert(self):
        pt = phi_from_v(constant(1.0), 1.0, 0.0, 0.0)
        t = pt.invert(pt.phi_of_t.value(0.7), (-2.0, 2.0))
        assert t == pytest.approx(0.7, abs=1e-10)


class TestTransformedEquation:
    def test_example1_transformed_residual(self):
        b = example_bundle(1, 3, 1.0)
        pt = phi_from_v(b.v_profile, 1.0, 0.0, _transform_base(b))
        x = np.array([1.0, 0.0, 0.0])
        assert transformed_residual_at(b.structure, pt, x).max_abs() <= 1e-7
        assert traceless_identity_gap(b.structure, pt, x) <= 1e-7

    def test_zero_v_reduces_to_plain_residual(self):
        b = example_bundle(0, 3, 1.0)  # nu = 0, so u = f exactly
        pt = phi_from_v(constant(0.0), 1.0, 0.0, _transform_base(b))
        rng = np.random.default_rng(13)
        for _ in range(5):
            x = rng.uniform(-1.5, 1.5, size=3)
            plain = residual_at(b.structure, x).mat
            transformed = transformed_residual_at(b.structure, pt, x).mat
            assert np.allclose(plain, transformed, atol=1e-12)

    def test_lambda_break_separates_the_two_identities(self):
        b = example_bundle(1, 3, 1.0)
        pt = phi_from_v(b.v_profile, 1.0, 0.0, _transform_base(b))
        broken = b.structure.with_lambda_offset(1.0)
        x = np.array([1.0, 0.0, 0.0])
        good_gap = traceless_identity_gap(b.structure, pt, x)
        broken_gap = traceless_identity_gap(broken, pt, x)
        assert abs(good_gap - broken_gap) <= 1e-12  # lambda-independent
        assert transformed_residual_at(broken, pt, x).max_abs() >= 0.5
        assert transformed_residual_at(b.structure, pt, x).max_abs() <= 1e-7

    def test_mismatched_v_is_rejected(self):
        b = example_bundle(1, 3, 1.0)
        pt = phi_from_v(constant(0.5), 1.0, 0.0, _transform_base(b))
        with pytest.raises(ValueError, match="factor through"):
            transformed_residual_at(b.structure, pt, np.array([1.0, 0.0, 0.0]))


class TestFitLambda:
    def test_example1_matches_closed_form(self):
        b = example_bundle(1, 3, 1.0)
        s = b.structure
        got = fit_lambda_by_trace(s.phi, s.f, s.nu, [1.0, 0.0, 0.0])
        assert got == pytest.approx(-10.0 / math.e, rel=1e-12)

    def test_flat_gaussian(self):
        b = example_bundle(0, 4, 1.0)
        s = b.structure
        got = fit_lambda_by_trace(s.phi, s.f, s.nu, [0.3, -0.2, 0.8, 0.1])
        assert got == pytest.approx(2.0, abs=1e-13)

    def test_fit_zeroes_the_residual_trace(self):
        b = example_bundle(3, 3)
        s = b.structure
        x = np.array([0.7, 0.2, -0.1])
        lam = fit_lambda_by_trace(s.phi, s.f, s.nu, x)
        fitted = GQEStructure(3, s.phi, s.f, s.nu,
                              ScalarFieldRn.explicit(lambda y: lam, 3))
        from gqelab import geometry
        res = residual_at(fitted, x)
        assert abs(geometry.trace_g(s.metric, res, x)) <= 1e-12
