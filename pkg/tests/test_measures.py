import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from resq import measures, qmath, states
from resq.errors import AlphaOutOfRange, DimensionMismatch, NonSquareBipartition

PLUS = np.full((2, 2), 0.5, dtype=complex)
KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
PLUS3 = qmath.projector(np.array([1, 1, 0]) / np.sqrt(2))  # robustness 1 inside a qutrit
MC3 = qmath.projector(states.max_coherent(3))  # robustness 2


# -- robustness family -------------------------------------------------------------


def test_robustness_examples():
    assert measures.robustness(np.diag([0.2, 0.8])).value == pytest.approx(0, abs=1e-7)
    assert measures.robustness(PLUS).value == pytest.approx(1, abs=1e-7)
    mixed = 0.5 * PLUS + 0.25 * np.eye(2)
    r = measures.robustness(mixed).value
    assert 0 < r < 1
    assert r <= 0.5 * 1 + 0.5 * 0 + 1e-7


def test_robustness_mixing_state_reaches_free_set(rng):
    rho = states.random_density(3, 2, rng)
    res = measures.robustness(rho)
    states.validate_state(res.mixing_state, tol=1e-7)
    mix = res.mixture(rho)
    assert np.max(np.abs(mix - np.diag(np.diag(mix)))) <= 1e-7


@pytest.mark.parametrize("rho, alpha, expected", [
    (PLUS, 0.0, 1.0),
    (PLUS3, 1.0, 0.0),
    (MC3, 1.0, 0.5),
])
def test_alpha_superiority_examples(rho, alpha, expected):
    assert measures.alpha_superiority(rho, alpha).value == pytest.approx(expected, abs=1e-7)


def test_alpha_out_of_range():
    with pytest.raises(AlphaOutOfRange):
        measures.alpha_superiority(PLUS, 1.0)
    with pytest.raises(AlphaOutOfRange):
        measures.alpha_superiority_direct(PLUS, -0.1)


def test_alpha_superiority_nesting(rng):
    for _ in range(20):
        rho = states.random_density(3, int(rng.integers(1, 4)), rng)
        vals = [measures.alpha_superiority(rho, a).value for a in (0.0, 0.3, 0.9, 1.5)]
        assert all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))


def test_alpha_direct_examples(rng):
    rho = 0.9 * np.diag([0.5, 0.5]) + 0.1 * PLUS  # robustness 0.1
    assert measures.alpha_superiority_direct(rho, 0.5).value == 0.0
    assert measures.alpha_superiority_direct(PLUS, 0.0).value == pytest.approx(1.0, abs=1e-6)
    q = states.random_density(2, 2, rng)
    closed = max((oracles.robustness_cvx(q) - 0.3) / 1.3, 0.0)
    assert measures.alpha_superiority_direct(q, 0.3).value == pytest.approx(closed, abs=1e-4)


def test_alpha_direct_mixing_state_lands_on_boundary(rng):
    rho = states.random_density(3, 3, rng)
    alpha = 0.2
    res = measures.alpha_superiority_direct(rho, alpha)
    assert res.value > 0
    mix = res.mixture(rho)
    assert oracles.robustness_cvx(mix) == pytest.approx(alpha, abs=1e-5)


def test_relative_robustness_examples():
    rho = states.random_density(2, 2, 11)
    assert measures.relative_robustness(rho, rho).value == pytest.approx(0, abs=1e-7)
    assert measures.relative_robustness(KET0, np.eye(2) / 2).value == pytest.approx(1, abs=1e-7)
    res = measures.relative_robustness(KET0, KET1)
    assert res.infinite and math.isinf(res.value)


def test_relative_mixing_state_decomposes_sigma(rng):
    rho = states.random_density(3, 2, rng)
    sigma = states.random_density(3, 3, rng)
    res = measures.relative_robustness(rho, sigma)
    states.validate_state(res.mixing_state, tol=1e-6)
    assert np.allclose(res.mixture(rho), sigma, atol=1e-7)


# -- coherence deficiency ----------------------------------------------------------


@pytest.mark.parametrize("rho, expected", [
    (PLUS, 0.0),
    (KET0, 0.5),
    (np.eye(2) / 2, 0.5),
])
def test_coherence_deficiency_examples(rho, expected):
    assert measures.coherence_deficiency(rho).value == pytest.approx(expected, abs=1e-9)


def test_coherence_deficiency_qubit_closed_form(rng):
    for _ in range(50):
        rho = states.random_density(2, 2, rng)
        assert 1 - measures.coherence_deficiency(rho).value == pytest.approx(
            oracles.coherent_fraction_qubit(rho), abs=1e-9)


def test_coherence_deficiency_qutrit_grid(rng):
    for _ in range(30):
        rho = states.random_density(3, int(rng.integers(2, 4)), rng)
        grid = oracles.coherent_fraction_qutrit(rho)
        f = 1 - measures.coherence_deficiency(rho).value
        # the grid is a lower bound accurate to O(step^2)
        assert grid - 1e-12 <= f <= grid + 1e-5


def test_coherence_deficiency_pure_forced_optimizer(rng):
    for d in (2, 3, 4):
        for _ in range(5):
            psi = states.random_pure(d, rng)
            rho = qmath.projector(psi)
            closed = oracles.pure_coherence_deficiency(psi)
            assert measures.coherence_deficiency(rho).value == pytest.approx(closed, abs=1e-8)
            forced = measures.coherence_deficiency(rho, force_optimizer=True)
            assert forced.value == pytest.approx(closed, abs=1e-5)
            assert forced.certified


def test_coherence_deficiency_argmax_attains_value(rng):
    rho = states.random_density(3, 2, rng)
    res = measures.coherence_deficiency(rho)
    psi = res.argmax_state
    assert np.allclose(np.abs(psi) ** 2, 1 / 3)
    assert 1 - np.vdot(psi, rho @ psi).real == pytest.approx(res.value, abs=1e-12)


# -- entanglement deficiency -------------------------------------------------------


def test_entanglement_deficiency_examples():
    phi = qmath.projector(states.max_entangled(2))
    assert measures.entanglement_deficiency(phi).value == pytest.approx(0, abs=1e-12)
    ket00 = np.zeros((4, 4), dtype=complex)
    ket00[0, 0] = 1
    assert measures.entanglement_deficiency(ket00).value == pytest.approx(0.5, abs=1e-12)
    psi = np.array([np.sqrt(0.9), 0, 0, np.sqrt(0.1)])
    expected = 1 - (np.sqrt(0.9) + np.sqrt(0.1)) ** 2 / 2
    assert expected == pytest.approx(0.2, abs=1e-12)
    assert measures.entanglement_deficiency(qmath.projector(psi)).value == pytest.approx(expected)


def test_entanglement_deficiency_dimension_errors():
    with pytest.raises(NonSquareBipartition):
        measures.entanglement_deficiency(np.eye(6) / 6, (2, 3))
    with pytest.raises(DimensionMismatch):
        measures.entanglement_deficiency(np.eye(4) / 4, (3, 3))


def test_entanglement_deficiency_matches_magic_basis(rng):
    for _ in range(100):
        rho = states.random_density(4, int(rng.integers(2, 5)), rng)
        assert 1 - measures.entanglement_deficiency(rho).value == pytest.approx(
            oracles.fully_entangled_fraction_2x2(rho), abs=1e-8)


def test_entanglement_deficiency_pure_forced_optimizer(rng):
    for d in (2, 3):
        for _ in range(5):
            psi = states.random_pure(d * d, rng)
            rho = qmath.projector(psi)
            closed = oracles.pure_entanglement_deficiency(psi, d)
            assert measures.entanglement_deficiency(rho).value == pytest.approx(closed, abs=1e-8)
            forced = measures.entanglement_deficiency(rho, force_optimizer=True).value
            assert forced == pytest.approx(closed, abs=1e-5)


def test_entanglement_deficiency_local_unitary_invariance():
    rng = np.random.default_rng(77)
    worst = 0.0
    for k in range(50):
        d = 2 if k % 2 else 3
        rho = states.random_density(d * d, int(rng.integers(1, d * d + 1)), rng)
        u = np.kron(states.random_unitary(d, rng), states.random_unitary(d, rng))
        a = measures.entanglement_deficiency(rho).value
        b = measures.entanglement_deficiency(u @ rho @ u.conj().T).value
        worst = max(worst, abs(a - b))
    assert worst <= 1e-4


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["coherence", "entanglement"]), st.integers(0, 2**32 - 1))
def test_deficiency_range_and_faithfulness(theory, seed):
    rng = np.random.default_rng(seed)
    if theory == "coherence":
        d = int(rng.integers(2, 4))
        rho = states.random_density(d, int(rng.integers(1, d + 1)), rng)
        res = measures.coherence_deficiency(rho)
    else:
        rho = states.random_density(4, int(rng.integers(1, 5)), rng)
        res = measures.entanglement_deficiency(rho)
    assert 0.0 <= res.value <= 1.0
    fid = qmath.fidelity(rho, res.argmax_state)
    assert fid == pytest.approx(1 - res.value, abs=1e-9)
    assert (res.value <= 1e-6) == (fid >= 1 - 1e-6)


# -- behaviour of the measures under selective operations --------------------------


def test_alpha_measure_selective_average_can_exceed_initial_value():
    # a qubit with R_r = 2|rho_01| = 0.5 and an incoherent two-outcome instrument
    rho = np.array([[0.9, 0.25], [0.25, 0.1]], dtype=complex)
    k1 = np.diag([1 / 3, 1.0])
    k2 = np.diag([np.sqrt(8 / 9), 0.0])
    ch = states.KrausChannel([k1, k2])
    assert all(states.is_incoherent_kraus(k) for k in ch.kraus)
    alpha = 0.45
    before = measures.alpha_superiority(rho, alpha).value
    branches = states.apply_channel(rho, ch, selective=True)
    after = sum(p * measures.alpha_superiority(s, alpha).value for p, s in branches)
    assert before == pytest.approx(0.05 / 1.45, abs=1e-7)
    assert after > before + 0.01
    # the deterministic output and the unclipped average still comply
    out = measures.alpha_superiority(states.apply_channel(rho, ch), alpha).value
    assert out <= before + 1e-7
    unclipped = sum(p * (measures.robustness(s).value - alpha) / (1 + alpha) for p, s in branches)
    assert unclipped <= before + 1e-7


def test_entanglement_deficiency_drops_under_one_sided_damping():
    psi_minus = np.array([0, 1, -1, 0]) / np.sqrt(2)
    ket00 = np.array([1, 0, 0, 0])
    rho = 0.3 * qmath.projector(psi_minus) + 0.7 * qmath.projector(ket00)
    damp = states.KrausChannel([np.diag([1.0, 0.0]), np.array([[0, 1], [0, 0]])])
    ch = states.local_channel(states.identity_channel(2), damp)
    before = measures.entanglement_deficiency(rho).value
    after = measures.entanglement_deficiency(ch(rho)).value
    assert before == pytest.approx(0.65, abs=1e-8)
    assert after == pytest.approx(0.575, abs=1e-8)
    branches = states.apply_channel(rho, ch, selective=True)
    avg = sum(p * measures.entanglement_deficiency(s).value for p, s in branches)
    # concavity puts the branch average at or below the deterministic value
    assert avg <= after + 1e-9 < before
