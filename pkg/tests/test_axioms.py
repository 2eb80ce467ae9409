import numpy as np
import pytest

from resq import axioms, fileio, states


def test_alpha_convexity_has_no_violations():
    rep = axioms.axiom_suite("alpha_superiority", "resource", 200, 1, d=2, alpha=0.3,
                             checks=("convexity",))
    assert len(rep.cases) == 200
    assert rep.passed


def test_coherence_deficiency_concavity():
    rep = axioms.axiom_suite("coherence_deficiency", "deficiency", 200, 1, checks=("convexity",))
    assert {c.extra["check"] for c in rep.cases} == {"concavity"}
    assert rep.passed


@pytest.mark.parametrize("d", [2, 3])
def test_coherence_deficiency_under_permutation_channels(d):
    rep = axioms.axiom_suite("coherence_deficiency", trials=200, seed=1, d=d,
                             channels="permutation", checks=("monotonicity",))
    for c in rep.cases:
        # branch average must not fall below the initial value
        assert c.value_direct >= c.value_closed_form - 1e-6
    assert rep.passed


def test_robustness_suite_full():
    rep = axioms.axiom_suite("robustness", trials=60, seed=4, d=3)
    assert set(rep.notes["by_check"]) == {"faithfulness", "monotonicity_deterministic",
                                          "monotonicity_selective", "convexity"}
    assert rep.passed


def test_alpha_faithfulness_sees_both_sides():
    rep = axioms.axiom_suite("alpha_superiority", trials=80, seed=2, d=3, alpha=0.5,
                             checks=("faithfulness",))
    inside = [c.extra["in_target_set"] for c in rep.cases]
    assert any(inside) and not all(inside)
    assert rep.passed


def test_alpha_deterministic_monotonicity():
    rep = axioms.axiom_suite("alpha_superiority", trials=100, seed=3, d=2, alpha=0.2,
                             checks=("monotonicity",))
    det = [c for c in rep.cases if c.extra["check"] == "monotonicity_deterministic"]
    assert len(det) == 100 and all(c.passed for c in det)


def test_entanglement_suite_under_local_unitaries():
    rep = axioms.axiom_suite("entanglement_deficiency", trials=60, seed=5, channels="local_unitary")
    assert rep.passed


def test_failed_cases_carry_their_inputs():
    rep = axioms.axiom_suite("entanglement_deficiency", trials=200, seed=1, channels="local",
                             checks=("monotonicity",))
    failures = rep.failures
    assert failures, "expected the local-channel sweep to expose violations"
    for c in failures:
        rho, dims = fileio.state_from_json(c.extra["inputs"]["rho"])
        assert dims == (2, 2)
        states.validate_state(rho)


def test_report_independent_of_worker_count():
    a = axioms.axiom_suite("coherence_deficiency", trials=30, seed=9, workers=1)
    b = axioms.axiom_suite("coherence_deficiency", trials=30, seed=9, workers=3)
    assert a.to_csv() == b.to_csv()


def test_sample_free_channel_families(rng):
    for family in axioms.CHANNEL_FAMILIES:
        ch = axioms.sample_free_channel(family, 2, rng)
        assert np.allclose(ch.completeness(), np.eye(ch.dim_in))
        if family in ("incoherent", "permutation"):
            assert all(states.is_incoherent_kraus(k) for k in ch.kraus)
    with pytest.raises(ValueError):
        axioms.sample_free_channel("global", 2, rng)


@pytest.mark.parametrize("kwargs", [
    dict(measure="nonsense"),
    dict(measure="robustness", kind="deficiency"),
    dict(measure="entanglement_deficiency", channels="incoherent"),
    dict(measure="coherence_deficiency", channels="local"),
])
def test_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        axioms.axiom_suite(trials=1, **kwargs)
