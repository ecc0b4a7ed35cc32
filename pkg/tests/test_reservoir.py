import numpy as np
import pytest

from glme import bosonic, fermionic, model, oracle, reservoir
from glme.errors import EvaluationError, StructuralError

from conftest import damped_oscillator_model


def single_decay_table(omega1=2.0, g=1.0):
    return reservoir.CouplingTable(
        n_modes=1,
        mode_frequencies=[omega1],
        terms=(reservoir.CouplingTerm(mode=0, channel=0, sign="-", c=g, omega=0.0),),
    )


def shared_channel_table(omega=1.5, detuning=0.0):
    return reservoir.CouplingTable(
        n_modes=2,
        mode_frequencies=[omega, omega + detuning],
        terms=(
            reservoir.CouplingTerm(0, 0, "-", 1.0, 0.0),
            reservoir.CouplingTerm(1, 0, "-", 1.0, 0.0),
        ),
    )


class TestResonantContributions:
    def test_single_decay_family_one(self):
        table = single_decay_table(omega1=2.0, g=1.0)
        contributions = reservoir.resonant_contributions(table, 1)
        assert len(contributions) == 1
        c = contributions[0]
        assert (c.j, c.k, c.channel, c.correlation_index) == (0, 0, 0, 1)
        assert c.eval_frequency == pytest.approx(2.0)
        assert c.amplitude_product == pytest.approx(1.0)

    def test_single_decay_family_two_is_empty(self):
        table = single_decay_table()
        assert reservoir.resonant_contributions(table, 2) == []
        assert reservoir.resonant_contributions(table, 3) == []

    def test_resonant_cross_terms_present(self):
        contributions = reservoir.resonant_contributions(shared_channel_table(), 1)
        pairs = {(c.j, c.k) for c in contributions}
        assert pairs == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_detuned_cross_terms_absent(self):
        table = shared_channel_table(detuning=0.3)
        contributions = reservoir.resonant_contributions(table, 1)
        pairs = {(c.j, c.k) for c in contributions}
        assert pairs == {(0, 0), (1, 1)}

    def test_widening_tolerance_grows_the_list(self):
        table = shared_channel_table(detuning=0.3)
        sizes = []
        previous = set()
        for tol in (None, 0.1, 0.5, 10.0, np.inf):
            contributions = reservoir.resonant_contributions(table, 1, tol_freq=tol)
            current = {(c.j, c.k, c.correlation_index, c.channel) for c in contributions}
            assert previous <= current
            previous = current
            sizes.append(len(contributions))
        assert sizes[0] < sizes[-1]

    def test_bad_family_rejected(self):
        with pytest.raises(StructuralError):
            reservoir.resonant_contributions(single_decay_table(), 5)


class TestAssembleRates:
    def test_single_decay_rates(self):
        table = single_decay_table()
        spectral = reservoir.SpectralFunctions(s1=lambda f: 0.5, s2=lambda f: 0.0)
        rates = reservoir.assemble_rates(table, spectral)
        assert rates.gamma(1)[0, 0] == pytest.approx(0.5)
        assert rates.big_gamma(1)[0, 0] == pytest.approx(1.0)
        for m in (2, 3, 4):
            assert np.max(np.abs(rates.gamma(m))) == 0.0

    def test_thermal_pumping_block(self):
        table = single_decay_table()
        spectral = reservoir.SpectralFunctions(s1=lambda f: 0.5, s2=lambda f: 0.25)
        rates = reservoir.assemble_rates(table, spectral)
        assert rates.gamma(4)[0, 0] == pytest.approx(0.25)
        assert rates.big_gamma(4)[0, 0] == pytest.approx(0.5)

    def test_textbook_flat_spectrum_rates(self):
        kappa, nbar = 0.8, 0.3
        table = single_decay_table()
        spectral = reservoir.SpectralFunctions.flat(kappa=kappa, nbar=nbar)
        rates = reservoir.assemble_rates(table, spectral)
        assert rates.big_gamma(1)[0, 0] == pytest.approx(kappa * (nbar + 1.0))
        assert rates.big_gamma(4)[0, 0] == pytest.approx(kappa * nbar)

    def test_collective_decay_rank_one(self):
        spectral = reservoir.SpectralFunctions.flat(kappa=1.0)
        rates = reservoir.assemble_rates(shared_channel_table(), spectral)
        block = rates.big_gamma(1)
        np.testing.assert_allclose(block, np.ones((2, 2)))
        assert np.linalg.matrix_rank(block) == 1

    def test_symmetry_relations(self, rng):
        # several channels, mixed signs, random spectra with imaginary parts
        terms = []
        freqs = rng.uniform(0.5, 2.0, size=3)
        for mode in range(3):
            for channel in range(2):
                for sign in ("+", "-"):
                    for _ in range(2):
                        terms.append(reservoir.CouplingTerm(
                            mode, channel, sign,
                            c=float(rng.uniform(0.1, 1.0)),
                            omega=float(rng.choice([0.0, 1.0, freqs[mode]])),
                        ))
        table = reservoir.CouplingTable(3, freqs, tuple(terms))
        spectral = reservoir.SpectralFunctions(
            s1=lambda f: 0.4 + 0.2j * np.tanh(f),
            s2=lambda f: 0.1 + 0.05j * np.cos(f),
        )
        rates = reservoir.assemble_rates(table, spectral, tol_freq=1e-9)
        assert rates.symmetry_defect() <= 1e-12


class TestSpectralFunctions:
    def test_tabulated_interpolation(self):
        spectral = reservoir.SpectralFunctions.tabulated(
            [[0.0, 0.0, 0.0], [2.0, 1.0, 0.5]], [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]
        )
        assert spectral.evaluate(1, 0, 1.0) == pytest.approx(0.5 + 0.25j)

    def test_out_of_range_names_frequency(self):
        spectral = reservoir.SpectralFunctions.tabulated(
            [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]], [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
        )
        with pytest.raises(EvaluationError, match="3.0"):
            spectral.evaluate(1, 0, 3.0)

    def test_negative_real_part_rejected(self):
        spectral = reservoir.SpectralFunctions(s1=lambda f: -0.2, s2=lambda f: 0.0)
        with pytest.raises(EvaluationError, match="negative real part"):
            spectral.evaluate(1, 0, 1.0)

    def test_per_channel_override(self):
        base = reservoir.SpectralFunctions.flat(kappa=1.0)
        spectral = base.with_channel(1, lambda f: 2.0, lambda f: 0.0)
        assert spectral.evaluate(1, 0, 1.0) == pytest.approx(0.5)
        assert spectral.evaluate(1, 1, 1.0) == pytest.approx(2.0)


class TestBuildModel:
    def test_flat_spectrum_pipeline_equals_damped_oscillator(self):
        omega1, kappa, nbar = 2.0, 0.5, 0.0
        table = single_decay_table(omega1=omega1)
        spectral = reservoir.SpectralFunctions.flat(kappa=kappa, nbar=nbar)
        built = reservoir.assemble_model(table, spectral)
        dd_built = bosonic.build_drift_diffusion(built)
        dd_ref = bosonic.build_drift_diffusion(
            damped_oscillator_model(gamma=kappa, omega=omega1, nbar=nbar)
        )
        assert np.max(np.abs(dd_built.a - dd_ref.a)) <= 1e-12
        assert np.max(np.abs(dd_built.d - dd_ref.d)) <= 1e-12

    def test_real_rates_leave_free_hamiltonian(self):
        table = single_decay_table(omega1=1.7)
        spectral = reservoir.SpectralFunctions.flat(kappa=0.4)
        built = reservoir.assemble_model(table, spectral)
        np.testing.assert_allclose(built.hamiltonian, 1.7 * np.eye(2), atol=1e-14)

    def test_imaginary_rates_add_lamb_shift(self):
        table = single_decay_table(omega1=1.7)
        spectral = reservoir.SpectralFunctions(s1=lambda f: 0.2 + 0.1j, s2=lambda f: 0.0)
        built = reservoir.assemble_model(table, spectral)
        # Im(s1) shifts the oscillator frequency away from the bare value
        shift = np.max(np.abs(built.hamiltonian - 1.7 * np.eye(2)))
        assert shift > 0.01
        report = model.validate_model(built)
        assert report.is_valid

    def test_collective_decay_dark_mode(self):
        spectral = reservoir.SpectralFunctions.flat(kappa=1.0)
        table = shared_channel_table()
        built = reservoir.assemble_model(table, spectral)
        dd = bosonic.build_drift_diffusion(built)
        stable, abscissa = bosonic.is_hurwitz(dd)
        assert not stable
        assert abs(abscissa) <= 1e-10

    def test_fermionic_flavor_pipeline(self):
        gamma = 0.6
        table = single_decay_table(omega1=0.0)
        spectral = reservoir.SpectralFunctions.flat(kappa=gamma)
        built = reservoir.assemble_model(table, spectral, flavor="fermionic")
        dd = fermionic.build_drift_diffusion(built)
        np.testing.assert_allclose(dd.x, -(gamma / 2.0) * np.eye(2), atol=1e-12)
        np.testing.assert_allclose(dd.y, gamma * np.array([[0.0, 1.0], [-1.0, 0.0]]), atol=1e-12)

    def test_assembled_model_passes_dense_closure(self):
        table = single_decay_table(omega1=1.2)
        spectral = reservoir.SpectralFunctions.flat(kappa=0.5, nbar=0.2)
        built = reservoir.assemble_model(table, spectral)
        deviations = oracle.moment_closure_check(built, fock_dim=16)
        assert max(deviations.values()) <= 1e-10

    def test_empty_couplings_give_zero_decoherence(self):
        table = reservoir.CouplingTable(1, [1.0], ())
        spectral = reservoir.SpectralFunctions.flat(kappa=1.0)
        built = reservoir.assemble_model(table, spectral)
        assert np.max(np.abs(built.gamma)) == 0.0
        np.testing.assert_allclose(built.hamiltonian, np.eye(2), atol=1e-14)
