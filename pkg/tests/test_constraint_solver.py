"""Mass relations, branch selection, sources and the fifth gauge component"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from cone_geometry import FourMomentum, cone_form, embed, minkowski_dot
from conftest import SMALL_DIMS, SMALL_SPACING, random_field
from constraint_solver import (
    ConstraintParams,
    MassPair,
    a5_from_a4,
    charged_masses,
    charged_params_from_masses,
    charged_sources,
    check_charged_constraint,
    fermion_alpha_branches,
    fermion_mass_ratio,
    neutral_alt_mass,
    neutral_mass_ratio,
    neutral_masses,
    neutral_source_transfer,
    neutral_sources,
    translate_cone_point,
)
from errors import (
    InconsistentParams,
    LatticeMismatch,
    MassBoundViolated,
    NegativeMass,
    NonPositiveMass,
    ZeroAlpha,
    ZeroBeta,
)
from field_decomposition import MomentumLatticeField, assemble_pm, decompose

nonzero = st.floats(min_value=0.05, max_value=5) | st.floats(min_value=-5, max_value=-0.05)
unit_masses = st.floats(min_value=0.3, max_value=1.0)


@pytest.mark.unit
class TestChargedMasses:

    def test_reference_point(self):
        p = ConstraintParams.charged(-0.6, 0.4)
        m = charged_masses(p)
        assert m.m_plus2 == pytest.approx(1.92, rel=1e-12)
        assert m.m_minus2 == pytest.approx(0.48, rel=1e-12)
        assert m.physical
        assert fermion_mass_ratio(p) == pytest.approx(4.0, rel=1e-12)

    def test_consistency_pair_completion(self):
        p = ConstraintParams.charged(-0.6, 0.4)
        assert p.beta_minus == p.alpha_plus
        assert p.alpha_minus == pytest.approx(1.6)
        assert max(abs(d) for d in p.charged_defects()) < 1e-12

    def test_massless_lock(self):
        m = charged_masses(ConstraintParams.charged(0.0, 0.7))
        assert m.m_plus2 == 0.0 and m.m_minus2 == 0.0
        assert math.copysign(1.0, m.m_plus2) == 1.0 and math.copysign(1.0, m.m_minus2) == 1.0

    @pytest.mark.parametrize("alpha, beta, masses, physical", [
        (0.0, 0.7, (0.0, 0.0), True),
        (-1.0, 0.5, (0.0, 1.0), True),
        (1.0, 0.5, (0.0, -1.0), False),
    ])
    def test_physical_flag_at_the_edges(self, alpha, beta, masses, physical):
        # the flag is "both squared masses >= 0", so |alpha_+| = 1 can still be physical
        m = charged_masses(ConstraintParams.charged(alpha, beta))
        assert (m.m_plus2, m.m_minus2) == masses
        assert m.physical is physical

    def test_unphysical_sign(self):
        m = charged_masses(ConstraintParams.charged(0.6, 0.4))
        assert m.m_minus2 == pytest.approx(-0.48)
        assert not m.physical

    def test_zero_beta(self):
        with pytest.raises(ZeroBeta):
            ConstraintParams.charged(0.5, 0.0)
        with pytest.raises(ZeroBeta):
            charged_masses(ConstraintParams(alpha_plus=0.5, alpha_minus=0.0, beta_plus=0.0, beta_minus=0.5, M=1.0))

    def test_inconsistent_params(self):
        p = ConstraintParams(alpha_plus=-0.6, alpha_minus=0.0, beta_plus=0.4, beta_minus=-0.6, M=1.0)
        with pytest.raises(InconsistentParams):
            charged_masses(p)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValidationError):
            ConstraintParams.charged(-0.6, 0.4, M=0.0)

    def test_masses_scale_with_M_squared(self):
        m = charged_masses(ConstraintParams.charged(-0.6, 0.4, M=2.0))
        assert m.m_minus2 == pytest.approx(4 * 0.48)


@pytest.mark.unit
class TestParamsFromMasses:

    def test_recovers_reference_point(self):
        p = charged_params_from_masses(MassPair(m_plus2=1.92, m_minus2=0.48), M=1.0, branch="-")
        assert p.alpha_plus == pytest.approx(-0.6, rel=1e-12)
        assert p.beta_plus == pytest.approx(0.4, rel=1e-12)

    def test_equal_masses_at_scale(self):
        for branch in "+-":
            p = charged_params_from_masses(MassPair(m_plus2=1.0, m_minus2=1.0), M=1.0, branch=branch)
            assert p.alpha_plus ** 2 == pytest.approx(0.5, rel=1e-12)

    def test_mass_bound(self):
        with pytest.raises(MassBoundViolated):
            charged_params_from_masses(MassPair(m_plus2=1.1, m_minus2=1.1), M=1.0)

    @pytest.mark.parametrize("m_plus2, m_minus2", [(0.0, 0.5), (0.5, -0.1)])
    def test_non_positive_mass(self, m_plus2, m_minus2):
        with pytest.raises(NonPositiveMass):
            charged_params_from_masses(MassPair(m_plus2=m_plus2, m_minus2=m_minus2), M=1.0)

    def test_unknown_branch(self):
        with pytest.raises(ValueError):
            charged_params_from_masses(MassPair(m_plus2=0.5, m_minus2=0.5), M=1.0, branch="0")

    def test_round_trip(self, rng):
        for _ in range(1000):
            m_plus2 = rng.uniform(0.01, 2.0)
            m_minus2 = rng.uniform(0.01, min(2.0, 0.999 / m_plus2))
            M = rng.uniform(0.5, 2.0)
            target = MassPair(m_plus2=m_plus2 * M ** 2, m_minus2=m_minus2 * M ** 2)
            for branch in "+-":
                p = charged_params_from_masses(target, M, branch)
                assert p.alpha_plus * p.beta_plus < 0
                m = charged_masses(p)
                assert m.m_plus2 == pytest.approx(target.m_plus2, rel=1e-10)
                assert m.m_minus2 == pytest.approx(target.m_minus2, rel=1e-10)


@pytest.mark.unit
class TestNeutral:

    def test_ratio_examples(self):
        assert neutral_mass_ratio(ConstraintParams.neutral(0.5, 1.0)) == pytest.approx(-1.25)
        assert neutral_mass_ratio(ConstraintParams.neutral(0.0, 2.0)) == pytest.approx(-0.25)

    def test_consistency_pair(self):
        p = ConstraintParams.neutral(0.5, 1.0)
        assert p.alpha_plus ** 2 + p.alpha_minus * p.beta_plus == pytest.approx(-1.0)
        assert p.beta_minus ** 2 + p.alpha_minus * p.beta_plus == pytest.approx(-1.0)

    def test_masses_have_opposite_signs(self):
        m = neutral_masses(ConstraintParams.neutral(0.5, 1.0))
        assert m.m_plus2 * m.m_minus2 < 0 and not m.physical

    @given(st.floats(-5, 5), nonzero)
    def test_no_go(self, alpha, beta):
        assert neutral_mass_ratio(ConstraintParams.neutral(alpha, beta)) < 0

    def test_no_go_sweep(self, rng):
        alphas = rng.uniform(-10, 10, 10_000)
        betas = rng.uniform(0.01, 10, 10_000) * rng.choice([-1.0, 1.0], 10_000)
        ratios = [neutral_mass_ratio(ConstraintParams.neutral(a, b)) for a, b in zip(alphas, betas)]
        assert max(ratios) < 0

    def test_alt_mass(self):
        assert neutral_alt_mass(1.0, 0.3) == 0.3
        assert neutral_alt_mass(2.0, 0.25) == 1.0
        with pytest.raises(NegativeMass):
            neutral_alt_mass(2.0, -0.25)

    def test_source_transfer(self, rng):
        j_plus = random_field(rng)
        F = random_field(rng)
        j_minus = neutral_source_transfer(2.0, j_plus, F)
        np.testing.assert_allclose(2.0 * j_minus.values - j_plus.values, F.values, atol=1e-15)

    def test_source_transfer_guards(self, field, acceptance_field):
        with pytest.raises(ZeroAlpha):
            neutral_source_transfer(0.0, field, field)
        with pytest.raises(LatticeMismatch):
            neutral_source_transfer(1.0, field, acceptance_field)


@pytest.mark.unit
class TestFermionBranches:

    def test_degenerate_discriminant(self):
        assert fermion_alpha_branches(1.0, 1.0, 1.0) == (0.5, 0.5)

    def test_light_limit(self):
        upper, lower = fermion_alpha_branches(1e-6, 1e-6, 1.0)
        assert upper == pytest.approx(1.0, abs=1e-12)
        assert 0 < lower < 1e-12

    def test_reference_point(self):
        upper, lower = fermion_alpha_branches(math.sqrt(1.92), math.sqrt(0.48), 1.0)
        assert upper == pytest.approx(0.64, rel=1e-12)
        assert lower == pytest.approx(0.36, rel=1e-12)
        assert upper * lower == pytest.approx(1.92 * 0.48 / 4, rel=1e-12)

    def test_bound(self):
        with pytest.raises(MassBoundViolated):
            fermion_alpha_branches(2.0, 2.0, 1.0)
        with pytest.raises(NonPositiveMass):
            fermion_alpha_branches(0.0, 1.0, 1.0)

    @given(unit_masses, unit_masses, st.floats(min_value=1.0, max_value=1.1))
    def test_branch_identity(self, m_plus, m_minus, M):
        for alpha2 in fermion_alpha_branches(m_plus, m_minus, M):
            assert 0 < alpha2 < 1
            assert 4 * M ** 4 * alpha2 * (1 - alpha2) == pytest.approx(m_plus ** 2 * m_minus ** 2, rel=1e-12)


def _pair(rng):
    return random_field(rng), random_field(rng)


@pytest.mark.unit
class TestSources:

    def test_charged_sources_formula(self, rng):
        p = ConstraintParams.charged(-0.6, 0.4)
        c_plus, c_minus = _pair(rng)
        q5 = rng.uniform(0, 3, SMALL_DIMS)
        j_plus, j_minus = charged_sources(p, c_plus, c_minus, q5)
        d = q5[..., np.newaxis]
        np.testing.assert_allclose(j_plus.values, 1.6 * c_plus.values - 0.6 * c_minus.values + d * c_minus.values,
                                   rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(j_minus.values, -0.6 * c_plus.values + 0.4 * c_minus.values + d * c_plus.values,
                                   rtol=1e-14, atol=1e-14)

    def test_neutral_sources_use_imaginary_derivative(self):
        p = ConstraintParams.neutral(0.5, 1.0, M=2.0)
        c_plus = MomentumLatticeField.zeros(SMALL_DIMS, SMALL_SPACING, 1.0)
        c_minus = c_plus.with_values(np.ones(SMALL_DIMS))
        q5 = np.full(SMALL_DIMS, 1.0)
        j_plus, _ = neutral_sources(p, c_plus, c_minus, q5)
        # M^2 (alpha_+ - i Q / M) C_- with C_- = 1
        np.testing.assert_allclose(j_plus.values, 4.0 * (0.5 - 0.5j))

    def test_default_fifth_momentum_is_on_shell(self, rng):
        p = ConstraintParams.charged(-0.6, 0.4)
        c_plus, c_minus = _pair(rng)
        explicit = charged_sources(p, c_plus, c_minus, decompose(c_plus).q5())
        default = charged_sources(p, c_plus, c_minus)
        np.testing.assert_array_equal(explicit[0].values, default[0].values)

    def test_lattice_mismatch(self, field, acceptance_field):
        with pytest.raises(LatticeMismatch):
            charged_sources(ConstraintParams.charged(-0.6, 0.4), field, acceptance_field)


@pytest.mark.unit
class TestChargedConstraintCheck:

    def _consistent(self, field, m_plus2, m_minus2):
        phi = decompose(field)
        ratio = (phi.q5() / phi.M)[..., np.newaxis]
        phi_plus, phi_minus = assemble_pm(phi, "+").values, assemble_pm(phi, "-").values
        c_plus = field.with_values((1 - ratio) * phi_plus)
        c_minus = field.with_values((1 - ratio) * phi_minus)
        j_plus = field.with_values(m_plus2 * phi_plus - (1 + ratio) * c_minus.values)
        j_minus = field.with_values(m_minus2 * phi_minus - (1 + ratio) * c_plus.values)
        return phi, c_plus, c_minus, j_plus, j_minus

    def test_consistent_fields_pass(self, field):
        report = check_charged_constraint(*self._consistent(field, 1.92, 0.48), 1.92, 0.48)
        assert report.name == "charged_constraint" and report.passed

    def test_perturbed_source_fails(self, field):
        phi, c_plus, c_minus, j_plus, j_minus = self._consistent(field, 1.92, 0.48)
        j_plus = j_plus.with_values(j_plus.values + 1e-6)
        assert not check_charged_constraint(phi, c_plus, c_minus, j_plus, j_minus, 1.92, 0.48).passed

    def test_lattice_mismatch(self, field, acceptance_field):
        phi = decompose(field)
        zero = MomentumLatticeField.zeros(SMALL_DIMS, SMALL_SPACING, 1.0)
        with pytest.raises(LatticeMismatch):
            check_charged_constraint(phi, zero, zero, acceptance_field, zero, 0.1, 0.1)


@pytest.mark.unit
class TestFifthGaugeComponent:

    def test_zero_gauge_sample(self):
        kappa = embed(FourMomentum(0.3, 0.1, -0.2, 0.4), 1.5, 1.0)
        a5, ratio = a5_from_a4(np.zeros(4), kappa, 0.7)
        assert a5 == 0
        assert ratio == pytest.approx(kappa.kminus / kappa.kplus)

    def test_linear_term_at_zero_coupling(self):
        kappa = embed(FourMomentum(0.3, 0.1, -0.2, 0.4), 1.5, 2.0)
        a = np.array([0.2, -0.1, 0.5, 0.3])
        a5, _ = a5_from_a4(a, kappa, 0.0)
        assert a5 == pytest.approx(-minkowski_dot(a, kappa.kmu) / (2.0 * 1.5))

    def test_complex_samples(self):
        kappa = embed(FourMomentum(1, 0, 0, 0), 1.0, 1.0)
        a5, _ = a5_from_a4(np.array([1j, 0, 0, 0]), kappa, 1.0)
        # (-2 i + i^2) / 2
        assert a5 == pytest.approx(-0.5 - 1j)

    def test_bad_sample_shape(self):
        with pytest.raises(ValueError):
            a5_from_a4(np.zeros(3), embed(FourMomentum(1, 0, 0, 0), 1.0, 1.0), 1.0)

    def test_complex_sample_rejected_for_cone_points(self):
        with pytest.raises(ValueError):
            translate_cone_point(embed(FourMomentum(1, 0, 0, 0), 1.0, 1.0), np.array([1j, 0, 0, 0]), 1.0)

    def test_translated_points_stay_on_cone(self, rng):
        for _ in range(1000):
            M = rng.uniform(0.5, 2.0)
            kappa = embed(FourMomentum.of(rng.uniform(-2, 2, 4)), rng.uniform(0.5, 2.0), M)
            shifted = translate_cone_point(kappa, rng.uniform(-1, 1, 4), rng.uniform(-1, 1))
            assert shifted.kplus == kappa.kplus
            norm = 1.0 + float(np.dot(shifted.components(), shifted.components()))
            assert abs(cone_form(shifted)) <= 1e-10 * norm
