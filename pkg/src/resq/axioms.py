"""Randomized checks of the framework conditions for resource and deficiency measures.

Resource measures (``robustness``, ``alpha_superiority``) are checked for
faithfulness, monotonicity under free channels and convexity. Deficiency
measures are checked for faithfulness, reversed selective monotonicity and
concavity. Violations are recorded in the report, never raised.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import measures, states
from .fileio import state_to_json
from .report import CaseRecord, ScenarioReport, parallel_map

SLACK = 1e-6

RESOURCE = "resource"
DEFICIENCY = "deficiency"

KINDS = {
    "robustness": RESOURCE,
    "alpha_superiority": RESOURCE,
    "alpha_superiority_direct": RESOURCE,
    "coherence_deficiency": DEFICIENCY,
    "entanglement_deficiency": DEFICIENCY,
}

DEFAULT_CHANNELS = {
    "entanglement_deficiency": "local",
}

CHANNEL_FAMILIES = ("incoherent", "permutation", "local", "local_unitary")


@dataclass(frozen=True)
class Setup:
    name: str
    kind: str
    d: int  # local dimension
    alpha: float
    channels: str
    slack: float

    @property
    def n(self) -> int:
        return self.d * self.d if self.name == "entanglement_deficiency" else self.d

    @property
    def dims(self):
        return (self.d, self.d) if self.name == "entanglement_deficiency" else None

    def value(self, rho) -> float:
        if self.name in ("alpha_superiority", "alpha_superiority_direct"):
            return measures.MEASURES[self.name](rho, self.alpha).value
        if self.name == "entanglement_deficiency":
            return measures.entanglement_deficiency(rho, self.dims).value
        return measures.MEASURES[self.name](rho).value


def _random_state(n: int, rng) -> np.ndarray:
    return states.random_density(n, int(rng.integers(1, n + 1)), rng)


def _random_maximal(setup: Setup, rng) -> np.ndarray:
    if setup.name == "entanglement_deficiency":
        psi = states.max_entangled(setup.d, states.random_unitary(setup.d, rng),
                                   states.random_unitary(setup.d, rng))
    else:
        psi = states.max_coherent(setup.d, states.random_phases(setup.d, rng))
    return states.as_density(psi)


def sample_free_channel(family: str, d: int, rng) -> states.KrausChannel:
    """A random free channel; ``local*`` families act on ``C^d (x) C^d``."""
    n = int(rng.integers(1, 4))
    if family == "incoherent":
        return states.sample_incoherent_channel(d, n + 1, rng)
    if family == "permutation":
        return states.random_permutation_channel(d, n + 1, rng)
    if family == "local":
        return states.local_channel(states.random_kraus_channel(d, n, rng),
                                    states.random_kraus_channel(d, int(rng.integers(1, 4)), rng))
    if family == "local_unitary":
        return states.local_channel(states.KrausChannel([states.random_unitary(d, rng)]),
                                    states.KrausChannel([states.random_unitary(d, rng)]))
    raise ValueError(f"unknown channel family {family!r}; expected one of {CHANNEL_FAMILIES}")


def _record(setup, k, check, lhs, rhs, residual, inputs=None, **extra):
    ok = residual <= setup.slack
    info = {"check": check, **extra}
    if not ok and inputs:
        info["inputs"] = {key: state_to_json(v, setup.dims) for key, v in inputs.items()}
    return CaseRecord(k, setup.d, float(lhs), float(rhs), float(residual), bool(ok),
                      alpha=setup.alpha if setup.kind == RESOURCE else None, extra=info)


def _faithfulness(setup: Setup, k: int, rng) -> CaseRecord:
    if setup.kind == RESOURCE:
        # mix a random state toward a diagonal one so both sides of the threshold occur
        rho = _random_state(setup.n, rng)
        diag = np.diag(rng.dirichlet(np.ones(setup.n))).astype(complex)
        q = 0.0 if k % 4 == 0 else float(rng.uniform())
        rho = q * rho + (1 - q) * diag
        value = setup.value(rho)
        r = measures.robustness(rho).value
        inside = r <= setup.alpha + setup.slack
        # a zero value must coincide with membership in the target set
        residual = 0.0 if (value <= setup.slack) == inside and value >= -setup.slack else 1.0
        return _record(setup, k, "faithfulness", r, value, residual, {"rho": rho},
                       in_target_set=bool(inside))
    if k % 2 == 0:
        rho = _random_maximal(setup, rng)
        value = setup.value(rho)
        return _record(setup, k, "faithfulness", 0.0, value, max(value, 0.0), {"rho": rho},
                       maximal=True)
    rho = _random_state(setup.n, rng)
    if states.is_pure(rho):
        rho = 0.9 * rho + 0.1 * np.eye(setup.n) / setup.n
    value = setup.value(rho)
    residual = 0.0 if setup.slack < value <= 1.0 else 1.0
    return _record(setup, k, "faithfulness", 0.0, value, residual, {"rho": rho}, maximal=False)


def _monotonicity(setup: Setup, k: int, rng) -> list:
    rho = _random_state(setup.n, rng)
    ch = sample_free_channel(setup.channels, setup.d, rng)
    before = setup.value(rho)
    branches = states.apply_channel(rho, ch, selective=True)
    avg = sum(p * setup.value(s) for p, s in branches)
    out = []
    if setup.kind == RESOURCE:
        after = setup.value(states.apply_channel(rho, ch))
        out.append(_record(setup, k, "monotonicity_deterministic", before, after,
                           max(after - before, 0.0), {"rho": rho}, channel=setup.channels))
        out.append(_record(setup, k, "monotonicity_selective", before, avg,
                           max(avg - before, 0.0), {"rho": rho}, channel=setup.channels,
                           branches=len(branches)))
    else:
        out.append(_record(setup, k, "monotonicity_selective", before, avg,
                           max(before - avg, 0.0), {"rho": rho}, channel=setup.channels,
                           branches=len(branches)))
    return out


def _convexity(setup: Setup, k: int, rng) -> CaseRecord:
    m = int(rng.integers(2, 4))
    parts = [_random_state(setup.n, rng) for _ in range(m)]
    q = rng.dirichlet(np.ones(m))
    mix = sum(w * p for w, p in zip(q, parts))
    lhs = setup.value(mix)
    rhs = float(sum(w * setup.value(p) for w, p in zip(q, parts)))
    if setup.kind == RESOURCE:
        return _record(setup, k, "convexity", rhs, lhs, max(lhs - rhs, 0.0), {"mix": mix})
    return _record(setup, k, "concavity", rhs, lhs, max(rhs - lhs, 0.0), {"mix": mix})


def _trial(setup: Setup, seed: int, checks, k: int) -> list:
    rng = np.random.default_rng([seed, k])
    out = []
    if "faithfulness" in checks:
        out.append(_faithfulness(setup, k, rng))
    if "monotonicity" in checks:
        out.extend(_monotonicity(setup, k, rng))
    if "convexity" in checks:
        out.append(_convexity(setup, k, rng))
    return out


def axiom_suite(measure: str, kind: str | None = None, trials: int = 200, seed: int = 1, *,
                d: int = 2, alpha: float = 0.0, channels: str | None = None,
                slack: float = SLACK, checks=("faithfulness", "monotonicity", "convexity"),
                workers: int | None = None) -> ScenarioReport:
    """Run ``trials`` randomized checks of the framework conditions for ``measure``.

    ``d`` is the local dimension (each party's, for entanglement). Per-trial
    randomness comes from ``default_rng([seed, k])``, so the report does not
    depend on the worker count.
    """
    if measure not in KINDS:
        raise ValueError(f"unknown measure {measure!r}; expected one of {sorted(KINDS)}")
    kind = kind or KINDS[measure]
    if kind != KINDS[measure]:
        raise ValueError(f"{measure} is a {KINDS[measure]} measure, not {kind}")
    channels = channels or DEFAULT_CHANNELS.get(measure, "incoherent")
    if measure == "entanglement_deficiency" and channels not in ("local", "local_unitary"):
        raise ValueError("entanglement checks need local channels")
    if measure != "entanglement_deficiency" and channels.startswith("local"):
        raise ValueError("local channels apply to the entanglement measure only")
    setup = Setup(measure, kind, int(d), float(alpha), channels, float(slack))
    if setup.kind == RESOURCE and setup.name != "robustness":
        measures._check_alpha(np.eye(setup.n), setup.alpha)

    start = time.perf_counter()
    rows = parallel_map(partial(_trial, setup, seed, tuple(checks)), range(trials), workers)
    report = ScenarioReport("axioms", params={
        "measure": measure, "kind": kind, "trials": trials, "d": setup.d,
        "alpha": setup.alpha, "channels": channels, "slack": slack, "checks": list(checks),
    }, seed=seed)
    for row in rows:
        for rec in row:
            rec.extra["trial"] = rec.case_id
            rec.case_id = len(report.cases)
            report.add(rec)
    report.notes["by_check"] = report.by_check()
    report.wall_time = time.perf_counter() - start
    return report
