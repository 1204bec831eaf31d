import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from conftest import two_mode_ket
from hyperradiance.errors import DenominatorTooSmall, HermitianExpectationComplex, OccupationTooSmall
from hyperradiance.liouville import DensityMatrix, model_liouvillian, steady_state
from hyperradiance.model import ModelParams, mode_operators
from hyperradiance.observables import (
    classify_radiance,
    compute_observables,
    expectation,
    g2_auto,
    g2_cross,
    log_negativity,
    partial_trace,
    radiance,
)
from hyperradiance.qspace import HilbertSpace, Operator, identity, make_space


def coherent(alpha, n):
    k = np.arange(n + 1)
    amp = np.exp(-abs(alpha) ** 2 / 2) * alpha**k / np.sqrt([float(math.factorial(int(j))) for j in k])
    return amp / np.linalg.norm(amp)


def thermal_pops(nbar, n):
    x = nbar / (1 + nbar)
    p = (1 - x) * x ** np.arange(n + 1)
    return p / p.sum()


def product(rho_n, rho_m):
    space = HilbertSpace((rho_n.shape[0], rho_m.shape[0]))
    return DensityMatrix(space, np.kron(rho_n, rho_m))


def test_expectation_examples():
    space = make_space(1, 2, 2)
    a, b, (sm,) = mode_operators(space)
    vac = DensityMatrix.basis_state(space, (0, 0, 0))
    excited = DensityMatrix.basis_state(space, (1, 0, 0))
    assert expectation(identity(space), vac) == 1.0
    assert expectation(a.dag() @ a, vac) == 0.0
    assert expectation(sm.dag() @ sm, excited) == 1.0
    # non-Hermitian operators return complex values untouched
    assert isinstance(expectation(a, vac), complex)


def test_expectation_flags_complex_hermitian_value():
    space = HilbertSpace((2,))
    bogus = DensityMatrix(space, np.array([[0.5, 0.5j], [0.5j, 0.5]]))  # not Hermitian
    sx = Operator(space, np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(HermitianExpectationComplex):
        expectation(sx, bogus)


class TestG2:
    def test_fock_one_is_antibunched(self):
        rho = product(np.diag([0, 1, 0, 0.0]), np.diag([1.0, 0]))
        assert g2_auto(rho, "photon") == 0.0

    def test_coherent_is_poissonian(self):
        psi = coherent(0.6, 40)
        rho = product(np.outer(psi, psi.conj()), np.diag([0.0, 1.0]))
        assert g2_auto(rho, "photon") == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("nbar, n", [(0.3, 8), (0.5, 40), (2.0, 120)])
    def test_thermal_matches_geometric_sum(self, nbar, n):
        p = thermal_pops(nbar, n)
        k = np.arange(n + 1)
        oracle = float((k * (k - 1) * p).sum() / (k * p).sum() ** 2)
        rho = product(np.diag([1.0, 0.0]), np.diag(p))
        assert g2_auto(rho, "phonon") == pytest.approx(oracle, rel=1e-12)

    def test_thermal_converges_to_two(self):
        rho = product(np.diag(thermal_pops(0.5, 60)), np.diag([0.0, 1.0]))
        assert g2_auto(rho, "photon") == pytest.approx(2.0, abs=1e-9)

    def test_vacuum_is_undefined(self):
        rho = product(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
        with pytest.raises(OccupationTooSmall):
            g2_auto(rho, "photon")
        with pytest.raises(OccupationTooSmall):
            g2_cross(rho)

    def test_bad_mode_name(self):
        rho = product(np.diag([0.0, 1.0]), np.diag([0.0, 1.0]))
        with pytest.raises(ValueError):
            g2_auto(rho, "atom")

    def test_cross_examples(self):
        ca, cb = coherent(0.4, 30), coherent(0.9 - 0.2j, 30)
        rho = product(np.outer(ca, ca.conj()), np.outer(cb, cb.conj()))
        assert g2_cross(rho) == pytest.approx(1.0, abs=1e-12)
        assert g2_cross(two_mode_ket({(1, 1): 1.0})) == pytest.approx(1.0, abs=1e-15)
        pair = two_mode_ket({(0, 0): 1.0, (1, 1): 1.0})
        assert g2_cross(pair) == pytest.approx(2.0, abs=1e-14)

    def test_atoms_are_traced_first(self):
        space = make_space(2, 1, 1)
        ket = (space.basis((1, 0, 0, 0)) + space.basis((0, 0, 1, 1))) / math.sqrt(2)
        rho = DensityMatrix.from_ket(space, ket)
        # reduced photon-phonon state is diag(1/2, 0, 0, 1/2)
        assert g2_cross(rho) == pytest.approx(2.0, abs=1e-14)


class TestPartialTrace:
    def test_keep_everything(self, rng):
        space = make_space(1, 1, 2)
        X = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        rho = DensityMatrix(space, X @ X.conj().T / np.trace(X @ X.conj().T))
        np.testing.assert_array_equal(partial_trace(rho, [0, 1, 2]).data, rho.data)

    def test_product_factor(self, rng):
        A = np.diag([0.2, 0.8])
        B = np.array([[0.5, 0.1], [0.1, 0.5]])
        C = np.diag([0.1, 0.3, 0.6])
        space = HilbertSpace((2, 2, 3), n_atoms=1)
        rho = DensityMatrix(space, np.kron(np.kron(A, B), C))
        np.testing.assert_allclose(partial_trace(rho, [1]).data, B, atol=1e-15)
        np.testing.assert_allclose(partial_trace(rho, [0, 2]).data, np.kron(A, C), atol=1e-15)
        assert partial_trace(rho, [0, 2]).space.n_atoms == 1

    def test_bell_marginal(self):
        pair = two_mode_ket({(0, 0): 1.0, (1, 1): 1.0})
        np.testing.assert_allclose(partial_trace(pair, [0]).data, np.eye(2) / 2, atol=1e-15)

    def test_bad_indices(self):
        rho = two_mode_ket({(0, 0): 1.0})
        with pytest.raises(IndexError):
            partial_trace(rho, [2])
        with pytest.raises(ValueError):
            partial_trace(rho, [])


class TestLogNegativity:
    def test_product_state_is_zero(self):
        rho = product(np.diag([0.7, 0.2, 0.1]), np.diag([0.4, 0.6]))
        assert log_negativity(rho) == 0.0

    def test_bell_state_is_one(self):
        pair = two_mode_ket({(0, 0): 1.0, (1, 1): 1.0}, dims=(3, 4))
        assert log_negativity(pair) == pytest.approx(1.0, abs=1e-12)

    def test_theta_family_oracle(self):
        theta = math.pi / 6
        c, s = math.cos(theta), math.sin(theta)
        # partial transpose of |psi><psi| on the {00,01,10,11} basis
        pt = np.array([[c * c, 0, 0, 0], [0, 0, c * s, 0], [0, c * s, 0, 0], [0, 0, 0, s * s]])
        oracle = math.log2(np.abs(np.linalg.eigvalsh(pt)).sum())
        assert oracle == pytest.approx(math.log2(1 + math.sqrt(3) / 2), abs=1e-15)
        rho = two_mode_ket({(0, 0): c, (1, 1): s})
        assert log_negativity(rho) == pytest.approx(oracle, abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_local_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        d = 3
        X = rng.normal(size=(d * d, 2)) + 1j * rng.normal(size=(d * d, 2))
        rho = X @ X.conj().T
        rho /= np.trace(rho)
        U = np.kron(unitary_group.rvs(d, random_state=rng), unitary_group.rvs(d, random_state=rng))
        space = HilbertSpace((d, d))
        before = log_negativity(DensityMatrix(space, rho))
        after = log_negativity(DensityMatrix(space, U @ rho @ U.conj().T))
        assert after == pytest.approx(before, abs=1e-10)
        assert before >= 0.0

    def test_transpose_choice_irrelevant_on_model_state(self):
        p = ModelParams(delta=30.0, j_coupling=25.0, n_atoms=2, cavity_cutoff=3, mech_cutoff=3)
        rho = steady_state(model_liouvillian(p))
        en_n = log_negativity(rho, transpose="photon")
        en_m = log_negativity(rho, transpose="phonon")
        assert en_n > 0
        assert en_n == pytest.approx(en_m, abs=1e-12)

    def test_bad_arguments(self):
        rho = two_mode_ket({(0, 0): 1.0})
        with pytest.raises(ValueError):
            log_negativity(rho, transpose="atom")
        with pytest.raises(ValueError):
            log_negativity(rho, space=HilbertSpace((2, 3)))


class TestRadiance:
    @pytest.mark.parametrize(
        "n2, n1, expected, label",
        [
            (2.0, 1.0, 0.0, "uncorrelated"),
            (4.0, 1.0, 1.0, "superradiance"),
            (1.0, 1.0, -0.5, "subradiance"),
            (5e-3, 1e-3, 1.5, "hyperradiance"),
            (3e-6, 1e-6, 0.5, "superradiance"),
        ],
    )
    def test_examples(self, n2, n1, expected, label):
        r = radiance(n2, n1)
        assert r == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert classify_radiance(r) == label

    def test_undefined(self):
        with pytest.raises(DenominatorTooSmall):
            radiance(1e-3, 0.0)
        assert classify_radiance(None) == "undefined"
        assert classify_radiance(float("nan")) == "undefined"


class TestComputeObservables:
    def test_vacuum_flags_and_zero_means(self):
        p = ModelParams(delta=0.0, j_coupling=1.0, omega_pump=0.0, cavity_cutoff=2, mech_cutoff=2)
        obs = compute_observables(steady_state(model_liouvillian(p)))
        assert obs.mean_photon == 0.0 and obs.mean_phonon == 0.0
        assert obs.g2_photon is obs.g2_phonon is obs.g2_cross is None
        assert obs.flags == ["g2n_undefined", "g2m_undefined", "g2nm_undefined"]
        assert obs.log_negativity == 0.0
        assert obs.cutoffs == (2, 2)

    def test_pumped_state_consistent_with_primitives(self):
        p = ModelParams(delta=10.0, j_coupling=10.0, n_atoms=1, cavity_cutoff=4, mech_cutoff=4)
        rho = steady_state(model_liouvillian(p))
        obs = compute_observables(rho)
        a, b, _ = mode_operators(rho.space)
        assert obs.mean_photon == pytest.approx(expectation(a.dag() @ a, rho), rel=1e-14)
        assert obs.g2_photon == pytest.approx(g2_auto(rho, "photon"), rel=1e-14)
        assert obs.g2_cross == pytest.approx(g2_cross(rho), rel=1e-14)
        assert obs.log_negativity == pytest.approx(log_negativity(rho), rel=1e-14)
        assert obs.residual == rho.residual
        assert not obs.flags
        assert set(obs.to_dict()) >= {"mean_photon", "g2_cross", "log_negativity", "flags", "cutoffs"}
