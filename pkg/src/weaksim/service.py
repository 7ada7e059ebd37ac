"""Command service layer.

Each function takes a loaded `ScenarioBundle` plus run parameters and
returns a `Report`; the click front end only parses flags, calls one of
these and renders the result.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config import DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_WORKERS, DEFAULT_ZERO_TEST_K, DEFAULT_ZERO_TOL
from .errors import ZeroPostselectionError
from .models import Report
from .montecarlo import convergence_sweep, estimate, exact_readouts, strong_statistics
from .persistence import ScenarioBundle
from .scenario import prob_intermediate, prob_transition, prob_via_channel, transition_amplitude
from .utils import log
from .weakvalues import (
    channel_decomposition,
    indirect_channel_probability,
    paradox_report,
    presence_verdict,
    weak_value,
)


def scenario_summary(bundle: ScenarioBundle) -> Dict[str, Any]:
    s = bundle.scenario
    amplitude = transition_amplitude(s)
    return {
        "name": s.name,
        "source": bundle.source,
        "dim": s.dim,
        "basis_labels": list(bundle.basis_labels),
        "transition_amplitude": {"re": amplitude.real, "im": amplitude.imag},
        "prob_transition": prob_transition(s),
        "meters": [{"label": m.label, "g": m.g, "sigma": m.sigma} for m in s.window.meter_events],
    }


def _weak_value_rows(bundle: ScenarioBundle, zero_tol: float) -> List[Dict[str, Any]]:
    """One row per basis ket, then one per named document projector"""
    s = bundle.scenario
    named = [(label, bundle.basis.projector(k)) for k, label in enumerate(bundle.basis_labels)]
    named += list(bundle.projectors.items())
    rows = []
    for label, op in named:
        wv = weak_value(op, s, label)
        rows.append({
            "label": label,
            "re": wv.value.real,
            "im": wv.value.imag,
            "verdict": presence_verdict(wv, zero_tol).value,
            "indirect_prob_via_channel": indirect_channel_probability(wv, s),
        })
    return rows


def _channel_rows(bundle: ScenarioBundle) -> List[Dict[str, Any]]:
    s = bundle.scenario
    decomposition = channel_decomposition(s, bundle.basis)
    return [
        {
            "label": label,
            "re": amplitude.real,
            "im": amplitude.imag,
            "prob_intermediate": prob_intermediate(s, k, bundle.basis),
            "prob_via_channel": prob_via_channel(s, k, bundle.basis),
        }
        for k, (label, amplitude) in enumerate(zip(decomposition.labels, decomposition.channel_amplitudes))
    ]


def analyze(
    bundle: ScenarioBundle,
    pair: Optional[Tuple[str, str]] = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> Report:
    """Weak values, channels, verdicts and (with a pair) the additivity check"""
    s = bundle.scenario
    log("analyze", f"scenario {s.name!r}, dim {s.dim}, {len(s.window.meter_events)} meter(s)")
    if zero_tol <= 0:
        raise ValueError(f"zero_tol must be positive, got {zero_tol}")

    report = Report(
        command="analyze",
        scenario=scenario_summary(bundle),
        weak_values=_weak_value_rows(bundle, zero_tol),
        channels=_channel_rows(bundle),
        parameters={"zero_tol": zero_tol, "pair": list(pair) if pair else None},
    )

    if pair:
        p_o, p_1 = bundle.projector(pair[0]), bundle.projector(pair[1])
        report.paradox = paradox_report(s, p_o, p_1, zero_tol, labels=pair)
        if report.paradox.contradiction:
            report.notes.append(
                f"{pair[0]} and {pair[1]} each read PRESENT while their union reads ABSENT"
            )

    if s.window.meter_events:
        try:
            report.exact = exact_readouts(s)
        except ZeroPostselectionError as e:
            report.notes.append(f"no exact pointer readouts: {e}")
    return report


def simulate(
    bundle: ScenarioBundle,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    workers: int = DEFAULT_WORKERS,
    zero_test_k: float = DEFAULT_ZERO_TEST_K,
) -> Report:
    """Monte Carlo estimates next to their closed-form oracle"""
    s = bundle.scenario
    log("simulate", f"scenario {s.name!r}: {trials} trials, seed {seed}, {workers} worker(s)")
    estimates = estimate(s, trials, seed, workers, zero_test_k)
    report = Report(
        command="simulate",
        scenario=scenario_summary(bundle),
        exact=exact_readouts(s),
        estimates=estimates,
        parameters={"trials": trials, "seed": seed, "zero_test_k": zero_test_k},
    )
    report.notes.append(f"verdicts use the statistical zero test at {zero_test_k:g} standard errors")
    return report


def default_meter(bundle: ScenarioBundle, meter: Optional[str]) -> str:
    labels = bundle.scenario.window.labels()
    if meter is not None:
        if meter not in labels:
            raise ValueError(f"no meter labelled {meter!r}; have {list(labels)}")
        return meter
    if len(labels) != 1:
        raise ValueError(f"--meter is required when the scenario has {len(labels)} meters")
    return labels[0]


def sweep(
    bundle: ScenarioBundle,
    meter: Optional[str],
    g_list: Sequence[float],
    mode: str = "exact",
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    workers: int = DEFAULT_WORKERS,
) -> Report:
    """<Q>/g along a decreasing list of strengths and the g -> 0 extrapolation"""
    label = default_meter(bundle, meter)
    result = convergence_sweep(bundle.scenario, label, g_list, mode, seed, trials, workers)
    parameters: Dict[str, Any] = {"meter": label, "g_list": list(g_list), "mode": mode}
    if mode == "sampled":
        parameters.update({"seed": seed, "trials": trials})
    return Report(
        command="sweep",
        scenario=scenario_summary(bundle),
        sweep=result,
        parameters=parameters,
    )


def strong(bundle: ScenarioBundle, trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED) -> Report:
    """Projective measurement in the channel basis followed by postselection"""
    stats = strong_statistics(bundle.scenario, bundle.basis, trials, seed)
    report = Report(
        command="strong",
        scenario=scenario_summary(bundle),
        channels=_channel_rows(bundle),
        strong=stats,
        parameters={"trials": trials, "seed": seed},
    )
    expected = sum(stats.prob_via_channel)
    if abs(expected - stats.prob_transition) > 1e-12:
        report.notes.append(
            f"strong measurement changes the postselection rate: {expected:.12g} vs {stats.prob_transition:.12g}"
        )
    return report
