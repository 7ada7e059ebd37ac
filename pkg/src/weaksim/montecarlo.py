"""Simulated repeated experiments: coupling, postselection, pointer readout and weak-value estimation.

Per-trial randomness is a pure function of (master seed, trial index, lane):
lane 0 decides postselection, lane 1 + m samples meter m. Trials are cut into
fixed-size blocks that may run on any number of threads; block results are
concatenated in block order, so the output never depends on the worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from .config import (
    BISECTION_STEPS,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    DEFAULT_ZERO_TEST_K,
    FIT_RESIDUAL_WARN,
    MIN_SWEEP_POINTS,
    MIN_TRIALS,
    SAMPLING_CHUNK_ELEMENTS,
    SAMPLING_GRID_POINTS,
    SAMPLING_SPAN_SIGMAS,
    TRIAL_BLOCK_SIZE,
)
from .errors import TooFewAcceptedError
from .hilbert import SpectralDecomposition, apply_operator, inner_product
from .meter import (
    gaussian_overlap,
    idle_wavefunction,
    pointer_expectations,
    postselect,
    postselected_amplitudes,
    weak_limit_readout,
    window_joint_state,
)
from .rng import RandomSource
from .scenario import Scenario, born_probabilities, prob_transition, prob_via_channel, strong_measure
from .utils import log, warn
from .weakvalues import Verdict, statistical_verdict


@dataclass(frozen=True)
class TrialRecord:
    accepted: bool
    readings: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class Estimate:
    label: str
    g: float
    mean_q: float
    std_error: float
    n_accepted: int
    n_trials: int
    acceptance_rate: float
    expected_acceptance: float
    weak_value_estimate: Optional[float]
    verdict: Verdict
    zero_test_k: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "g": self.g,
            "mean_q": self.mean_q,
            "std_error": self.std_error,
            "n_accepted": self.n_accepted,
            "n_trials": self.n_trials,
            "acceptance_rate": self.acceptance_rate,
            "expected_acceptance": self.expected_acceptance,
            "weak_value_estimate": self.weak_value_estimate,
            "verdict": self.verdict.value,
            "zero_test_k": self.zero_test_k,
        }


@dataclass(frozen=True)
class ExactReadout:
    label: str
    g: float
    mean_q: float
    mean_p: float
    acceptance: float
    readout: Optional[complex]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "g": self.g,
            "mean_q": self.mean_q,
            "mean_p": self.mean_p,
            "mean_q_over_g": self.mean_q / self.g if self.g > 0 else None,
            "acceptance": self.acceptance,
            "readout_re": self.readout.real if self.readout is not None else None,
            "readout_im": self.readout.imag if self.readout is not None else None,
        }


@dataclass(frozen=True)
class SweepResult:
    meter_label: str
    mode: str
    g_values: Tuple[float, ...]
    values: Tuple[float, ...]
    extrapolated: float
    fit_curvature: float
    fit_residual: float
    std_errors: Optional[Tuple[float, ...]] = None
    extrapolated_std_error: Optional[float] = None

    def to_dict(self) -> dict:
        rows = []
        for i, g in enumerate(self.g_values):
            row = {"g": g, "mean_q_over_g": self.values[i]}
            if self.std_errors is not None:
                row["std_error"] = self.std_errors[i]
            rows.append(row)
        return {
            "meter": self.meter_label,
            "mode": self.mode,
            "rows": rows,
            "extrapolated": self.extrapolated,
            "fit_curvature": self.fit_curvature,
            "fit_residual": self.fit_residual,
            "extrapolated_std_error": self.extrapolated_std_error,
        }


@dataclass(frozen=True)
class StrongStatistics:
    labels: Tuple[str, ...]
    n_trials: int
    outcome_counts: Tuple[int, ...]
    accepted_counts: Tuple[int, ...]
    born_probabilities: Tuple[float, ...]
    prob_via_channel: Tuple[float, ...]
    prob_transition: float

    @property
    def acceptance_rate(self) -> float:
        return sum(self.accepted_counts) / self.n_trials

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "prob_transition": self.prob_transition,
            "strong_acceptance": self.acceptance_rate,
            "strong_acceptance_expected": float(sum(self.prob_via_channel)),
            "channels": [
                {
                    "label": label,
                    "prob_intermediate": self.born_probabilities[k],
                    "frequency": self.outcome_counts[k] / self.n_trials,
                    "prob_via_channel": self.prob_via_channel[k],
                    "joint_frequency": self.accepted_counts[k] / self.n_trials,
                }
                for k, label in enumerate(self.labels)
            ],
        }


# ---------------------------------------------------------------------------
# Sampling plan: everything about a scenario that is the same for every trial
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _SamplingPlan:
    labels: Tuple[str, ...]
    gs: Tuple[float, ...]
    sigmas: np.ndarray  # (M,)
    shifts: np.ndarray  # (B, M)
    pair_weights: np.ndarray  # (B, B) conj(c_i) c_j
    overlaps: Tuple[np.ndarray, ...]  # per meter (B, B)
    acceptance: float
    brackets: Tuple[Tuple[float, float], ...] = field(default=())
    first_grid: np.ndarray = field(default=None)  # (G,) positions for meter 0
    first_cdf: np.ndarray = field(default=None)  # (G,) normalized, nondecreasing

    @classmethod
    def for_scenario(cls, s: Scenario) -> "_SamplingPlan":
        meters = s.window.meter_events
        if not meters:
            raise ValueError("scenario has no meters in its window")
        joint = window_joint_state(s.evolved_state(), meters, s.u_post)
        acceptance, _ = postselect(joint, s.postselected)
        amplitudes = postselected_amplitudes(joint, s.postselected)
        shifts = joint.shift_matrix()
        sigmas = np.array([m.sigma for m in meters])
        overlaps = tuple(
            gaussian_overlap(shifts[:, m][:, None], shifts[:, m][None, :], sigmas[m]) for m in range(len(meters))
        )
        brackets = tuple(
            (
                float(shifts[:, m].min() - SAMPLING_SPAN_SIGMAS * sigmas[m]),
                float(shifts[:, m].max() + SAMPLING_SPAN_SIGMAS * sigmas[m]),
            )
            for m in range(len(meters))
        )
        plan = cls(
            labels=tuple(m.label for m in meters),
            gs=tuple(m.g for m in meters),
            sigmas=sigmas,
            shifts=shifts,
            pair_weights=np.outer(amplitudes.conj(), amplitudes),
            overlaps=overlaps,
            acceptance=acceptance,
            brackets=brackets,
        )
        grid, cdf = plan._first_meter_table()
        object.__setattr__(plan, "first_grid", grid)
        object.__setattr__(plan, "first_cdf", cdf)
        return plan

    def _static_weights(self, m: int) -> np.ndarray:
        """Real pair weights (B, B) of meter m with every later meter traced out"""
        weights = self.pair_weights * self.overlaps[m]
        for n in range(m + 1, len(self.labels)):
            weights = weights * self.overlaps[n]
        return np.real(weights)

    def _centres(self, m: int) -> np.ndarray:
        column = self.shifts[:, m]
        return (0.5 * (column[:, None] + column[None, :])).reshape(-1)

    def _first_meter_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Meter 0 is conditioned on nothing, so its CDF is tabulated once for all trials"""
        weights = self._static_weights(0).reshape(-1)
        centres = self._centres(0)
        grid = np.linspace(self.brackets[0][0], self.brackets[0][1], SAMPLING_GRID_POINTS)
        cdf = np.empty_like(grid)
        step = max(1, SAMPLING_CHUNK_ELEMENTS // weights.size)
        for start in range(0, grid.size, step):
            z = (grid[start:start + step, None] - centres[None, :]) / self.sigmas[0]
            cdf[start:start + step] = ndtr(z) @ weights
        cdf = np.maximum.accumulate(cdf / weights.sum())
        return grid, cdf

    def _conditional_weights(self, m: int, earlier: np.ndarray) -> np.ndarray:
        """Per-trial real pair weights (T, B*B) of meter m given the readings `earlier` (T, m)"""
        weights = np.broadcast_to(self._static_weights(m), (earlier.shape[0],) + self.pair_weights.shape)
        for n in range(m):
            phi = idle_wavefunction(earlier[:, n][:, None] - self.shifts[:, n][None, :], self.sigmas[n])
            weights = weights * (phi[:, :, None] * phi[:, None, :])
        return weights.reshape(earlier.shape[0], -1)

    def _bisect(self, m: int, uniforms: np.ndarray, earlier: np.ndarray) -> np.ndarray:
        weights = self._conditional_weights(m, earlier)
        centres = self._centres(m)
        target = uniforms * weights.sum(axis=1)
        lo = np.full(uniforms.size, self.brackets[m][0])
        hi = np.full(uniforms.size, self.brackets[m][1])
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            cdf = np.sum(weights * ndtr((mid[:, None] - centres[None, :]) / self.sigmas[m]), axis=1)
            below = cdf < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def trial_chunk(self) -> int:
        """Trials per bisection pass, keeping trials x branches^2 under SAMPLING_CHUNK_ELEMENTS"""
        return max(1, SAMPLING_CHUNK_ELEMENTS // self.pair_weights.size)

    def sample_readings(self, uniforms: np.ndarray) -> np.ndarray:
        """Readings (T, M) from uniforms (T, M), each meter conditioned on the earlier readings"""
        n_trials, n_meters = uniforms.shape
        readings = np.zeros((n_trials, n_meters))
        if n_trials == 0:
            return readings
        readings[:, 0] = np.interp(uniforms[:, 0], self.first_cdf, self.first_grid)
        chunk = self.trial_chunk()
        for m in range(1, n_meters):
            for start in range(0, n_trials, chunk):
                rows = slice(start, start + chunk)
                readings[rows, m] = self._bisect(m, uniforms[rows, m], readings[rows, :m])
        return readings

    def run_block(self, master: RandomSource, start: int, stop: int) -> Tuple[int, np.ndarray]:
        """Accepted count and readings for trials start..stop-1"""
        indices = np.arange(start, stop, dtype=np.int64)
        accepted = master.child_uniforms(indices, 0) < self.acceptance
        kept = indices[accepted]
        uniforms = np.column_stack(
            [master.child_uniforms(kept, 1 + m) for m in range(len(self.labels))]
        ) if kept.size else np.zeros((0, len(self.labels)))
        return int(kept.size), self.sample_readings(uniforms)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def run_once(s: Scenario, rng: RandomSource) -> TrialRecord:
    """One experiment: couple the window meters, evolve, postselect, read every pointer"""
    plan = _SamplingPlan.for_scenario(s)
    if rng.uniform(0) >= plan.acceptance:
        return TrialRecord(False)
    uniforms = np.array([[rng.uniform(1 + m) for m in range(len(plan.labels))]])
    readings = plan.sample_readings(uniforms)[0]
    return TrialRecord(True, tuple(float(q) for q in readings))


def exact_readouts(s: Scenario) -> List[ExactReadout]:
    """Closed-form pointer means for every meter in the window"""
    joint = window_joint_state(s.evolved_state(), s.window.meter_events, s.u_post)
    acceptance, pointers = postselect(joint, s.postselected)
    readouts = []
    for pointer in pointers:
        mean_q, mean_p = pointer_expectations(pointer)
        g = pointer.meter.g
        readout = weak_limit_readout(pointer, g) if g > 0 else None
        readouts.append(ExactReadout(pointer.meter.label, g, mean_q, mean_p, acceptance, readout))
    return readouts


def _run_trials(
    plan: _SamplingPlan, n_trials: int, master: RandomSource, workers: int
) -> Tuple[int, np.ndarray]:
    """Accepted count and readings (n_accepted, M) in trial order"""
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
    starts = list(range(0, n_trials, TRIAL_BLOCK_SIZE))
    log("montecarlo", f"{n_trials} trials in {len(starts)} blocks on {workers} worker(s)")

    def _block(start: int) -> Tuple[int, np.ndarray]:
        return plan.run_block(master, start, min(start + TRIAL_BLOCK_SIZE, n_trials))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block, starts))
    else:
        results = [_block(start) for start in starts]

    n_accepted = sum(count for count, _ in results)
    log("montecarlo", f"accepted {n_accepted}/{n_trials} trials")
    return n_accepted, np.concatenate([r for _, r in results], axis=0)


def sample_readings(
    s: Scenario, n_trials: int, seed: int = DEFAULT_SEED, workers: int = DEFAULT_WORKERS
) -> Tuple[int, np.ndarray]:
    """Raw accepted pointer readings, one column per meter in window order"""
    return _run_trials(_SamplingPlan.for_scenario(s), n_trials, RandomSource(seed), workers)


def _estimate_from_source(
    s: Scenario, n_trials: int, master: RandomSource, workers: int, zero_test_k: float
) -> List[Estimate]:
    plan = _SamplingPlan.for_scenario(s)
    n_accepted, readings = _run_trials(plan, n_trials, master, workers)
    if n_accepted < 2:
        raise TooFewAcceptedError(n_accepted, n_trials)

    estimates = []
    for m, label in enumerate(plan.labels):
        column = readings[:, m]
        mean_q = float(np.mean(column))
        std_error = float(np.std(column, ddof=1) / np.sqrt(n_accepted))
        g = plan.gs[m]
        estimates.append(
            Estimate(
                label=label,
                g=g,
                mean_q=mean_q,
                std_error=std_error,
                n_accepted=n_accepted,
                n_trials=n_trials,
                acceptance_rate=n_accepted / n_trials,
                expected_acceptance=plan.acceptance,
                weak_value_estimate=mean_q / g if g > 0 else None,
                verdict=statistical_verdict(mean_q, std_error, zero_test_k),
                zero_test_k=zero_test_k,
            )
        )
    return estimates


def estimate(
    s: Scenario,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    workers: int = DEFAULT_WORKERS,
    zero_test_k: float = DEFAULT_ZERO_TEST_K,
) -> List[Estimate]:
    """Monte Carlo estimate of every meter's postselected pointer mean"""
    return _estimate_from_source(s, n_trials, RandomSource(seed), workers, zero_test_k)


def _validate_g_list(g_list: Sequence[float]) -> Tuple[float, ...]:
    values = tuple(float(g) for g in g_list)
    if len(values) < MIN_SWEEP_POINTS:
        raise ValueError(f"need at least {MIN_SWEEP_POINTS} g values, got {len(values)}")
    if any(g <= 0 for g in values):
        raise ValueError("every g must be > 0")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError(f"g values must be strictly decreasing, got {list(values)}")
    return values


def convergence_sweep(
    s: Scenario,
    meter_label: str,
    g_list: Sequence[float],
    mode: str = "exact",
    seed: int = DEFAULT_SEED,
    n_trials: int = DEFAULT_TRIALS,
    workers: int = DEFAULT_WORKERS,
) -> SweepResult:
    """Evaluate <Q>/g along decreasing g and extrapolate w from the fit w + c g^2"""
    g_values = _validate_g_list(g_list)
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    s.window.meter(meter_label)

    master = RandomSource(seed)
    values, std_errors = [], []
    for i, g in enumerate(g_values):
        scenario_g = s.with_meter_strength(meter_label, g)
        if mode == "exact":
            readout = next(r for r in exact_readouts(scenario_g) if r.label == meter_label)
            values.append(readout.mean_q / g)
        else:
            estimates = _estimate_from_source(scenario_g, n_trials, master.split(i), workers, DEFAULT_ZERO_TEST_K)
            est = next(e for e in estimates if e.label == meter_label)
            values.append(est.mean_q / g)
            std_errors.append(est.std_error / g)
        log("sweep", f"g={g:.6g} -> <Q>/g={values[-1]:.12g}")

    g_arr = np.array(g_values)
    design = np.column_stack([np.ones_like(g_arr), g_arr ** 2])
    coeffs, *_ = np.linalg.lstsq(design, np.array(values), rcond=None)
    fitted = design @ coeffs
    residual = float(np.sqrt(np.mean((np.array(values) - fitted) ** 2)))
    if mode == "exact" and residual > FIT_RESIDUAL_WARN:
        warn("sweep", f"fit residual {residual:.3g} is large; <Q>/g is not quadratic in g over this range")

    extrapolated_se = None
    if mode == "sampled":
        pinv = np.linalg.pinv(design)
        extrapolated_se = float(np.sqrt(np.sum((pinv[0] * np.array(std_errors)) ** 2)))

    return SweepResult(
        meter_label=meter_label,
        mode=mode,
        g_values=g_values,
        values=tuple(float(v) for v in values),
        extrapolated=float(coeffs[0]),
        fit_curvature=float(coeffs[1]),
        fit_residual=residual,
        std_errors=tuple(std_errors) if mode == "sampled" else None,
        extrapolated_std_error=extrapolated_se,
    )


# ---------------------------------------------------------------------------
# Strong measurement followed by postselection
# ---------------------------------------------------------------------------


def _channel_acceptance(s: Scenario, basis: SpectralDecomposition, born: np.ndarray) -> np.ndarray:
    """|<f|U(t_f,t_m)|collapsed_k>|^2 per channel, zero for channels that never occur"""
    state = s.evolved_state()
    acceptance = np.zeros(len(basis))
    for k, projector in enumerate(basis.projectors):
        if born[k] <= 0.0:
            continue
        collapsed = apply_operator(projector, state).normalized()
        acceptance[k] = abs(inner_product(s.postselected, apply_operator(s.u_post, collapsed))) ** 2
    return acceptance


def strong_then_postselect(s: Scenario, basis: SpectralDecomposition, rng: RandomSource) -> Tuple[int, bool]:
    """Projective measurement at t_m with collapse, then the postselection test at t_f"""
    state = s.evolved_state()
    outcome = strong_measure(state, basis, rng)
    acceptance = _channel_acceptance(s, basis, born_probabilities(state, basis))
    return outcome.eigenvalue_index, bool(rng.uniform(1) < acceptance[outcome.eigenvalue_index])


def strong_statistics(
    s: Scenario, basis: SpectralDecomposition, n_trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED
) -> StrongStatistics:
    """Aggregate strong_then_postselect over trials seeded by (seed, trial index)"""
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
    state = s.evolved_state()
    born = born_probabilities(state, basis)
    cumulative = np.cumsum(born)
    acceptance = _channel_acceptance(s, basis, born)
    master = RandomSource(seed)

    outcome_counts = np.zeros(len(basis), dtype=np.int64)
    accepted_counts = np.zeros(len(basis), dtype=np.int64)
    for start in range(0, n_trials, TRIAL_BLOCK_SIZE):
        indices = np.arange(start, min(start + TRIAL_BLOCK_SIZE, n_trials), dtype=np.int64)
        u = master.child_uniforms(indices, 0) * cumulative[-1]
        outcomes = np.minimum(np.searchsorted(cumulative, u, side="right"), len(basis) - 1)
        accepted = master.child_uniforms(indices, 1) < acceptance[outcomes]
        outcome_counts += np.bincount(outcomes, minlength=len(basis))
        accepted_counts += np.bincount(outcomes[accepted], minlength=len(basis))

    return StrongStatistics(
        labels=tuple(basis.label(k) for k in range(len(basis))),
        n_trials=n_trials,
        outcome_counts=tuple(int(c) for c in outcome_counts),
        accepted_counts=tuple(int(c) for c in accepted_counts),
        born_probabilities=tuple(float(p) for p in born),
        prob_via_channel=tuple(prob_via_channel(s, k, basis) for k in range(len(basis))),
        prob_transition=prob_transition(s),
    )
