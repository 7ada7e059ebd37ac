"""Analytic weak values, channel decomposition, presence verdicts and the additivity contradiction"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .config import DEFAULT_ZERO_TEST_K, DEFAULT_ZERO_TOL, ROLE_TOL
from .errors import DimensionError, NotOrthogonalError
from .hilbert import LinearOperator, OperatorRole, SpectralDecomposition, apply_operator, inner_product, validate
from .scenario import Scenario, channel_amplitude, prob_transition, transition_amplitude


class Verdict(str, Enum):
    PRESENT = "PRESENT"
    ABSENT = "ABSENT"


@dataclass(frozen=True)
class WeakValue:
    value: complex
    operator_label: str = "op"


@dataclass(frozen=True)
class ChannelDecomposition:
    labels: Tuple[str, ...]
    channel_amplitudes: Tuple[complex, ...]
    total: complex


@dataclass(frozen=True)
class ParadoxReport:
    wv_o: WeakValue
    wv_1: WeakValue
    wv_sum: WeakValue
    verdict_o: Verdict
    verdict_1: Verdict
    verdict_sum: Verdict
    contradiction: bool
    zero_tol: float

    def to_dict(self) -> dict:
        return {
            "zero_tol": self.zero_tol,
            "contradiction": self.contradiction,
            "operators": [
                {
                    "label": wv.operator_label,
                    "re": wv.value.real,
                    "im": wv.value.imag,
                    "verdict": verdict.value,
                }
                for wv, verdict in (
                    (self.wv_o, self.verdict_o),
                    (self.wv_1, self.verdict_1),
                    (self.wv_sum, self.verdict_sum),
                )
            ],
        }


def weak_value_numerator(op: LinearOperator, s: Scenario) -> complex:
    """<f|U(t_f,t_m) op U(t_m,t_i)|in>"""
    if op.dim != s.dim:
        raise DimensionError(f"operator has dim {op.dim}, scenario has dim {s.dim}")
    return inner_product(s.postselected, apply_operator(s.u_post @ op @ s.u_pre, s.preselected))


def weak_value(op: LinearOperator, s: Scenario, label: str = "op") -> WeakValue:
    """(op)_w = <f|U(t_f,t_m) op U(t_m,t_i)|in> / <f|U(t_f,t_i)|in>"""
    return WeakValue(weak_value_numerator(op, s) / transition_amplitude(s), label)


def channel_decomposition(s: Scenario, basis: SpectralDecomposition) -> ChannelDecomposition:
    """Split the transition amplitude into one term per intermediate channel"""
    if basis.dim != s.dim:
        raise DimensionError(f"basis has dim {basis.dim}, scenario has dim {s.dim}")
    amplitudes = tuple(channel_amplitude(s, k, basis) for k in range(len(basis)))
    labels = tuple(basis.label(k) for k in range(len(basis)))
    return ChannelDecomposition(labels, amplitudes, complex(sum(amplitudes)))


def presence_verdict(wv: WeakValue, zero_tol: float = DEFAULT_ZERO_TOL) -> Verdict:
    """ABSENT iff |value| < zero_tol; sign and phase never matter"""
    if zero_tol <= 0:
        raise ValueError(f"zero_tol must be positive, got {zero_tol}")
    return Verdict.ABSENT if abs(wv.value) < zero_tol else Verdict.PRESENT


def statistical_verdict(mean: float, std_error: float, k: float = DEFAULT_ZERO_TEST_K) -> Verdict:
    """Sampled readout counts as idle when it lies within k standard errors of zero"""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    return Verdict.ABSENT if abs(mean) <= k * std_error else Verdict.PRESENT


def paradox_report(
    s: Scenario,
    p_o: LinearOperator,
    p_1: LinearOperator,
    zero_tol: float = DEFAULT_ZERO_TOL,
    labels: Tuple[str, str] = ("Pi_o", "Pi_1"),
) -> ParadoxReport:
    """Weak values of Pi_o, Pi_1 and Pi_o + Pi_1 on the same window state, with verdicts"""
    if p_o.dim != p_1.dim:
        raise DimensionError(f"projectors have dims {p_o.dim} and {p_1.dim}")
    for label, p in zip(labels, (p_o, p_1)):
        if not validate(p, OperatorRole.PROJECTOR):
            raise ValueError(f"{label} is not an orthogonal projector")
    if not np.allclose(p_o.entries @ p_1.entries, 0.0, rtol=0.0, atol=ROLE_TOL):
        raise NotOrthogonalError(f"{labels[0]} and {labels[1]} are not orthogonal")

    wv_o = weak_value(p_o, s, labels[0])
    wv_1 = weak_value(p_1, s, labels[1])
    wv_sum = weak_value(p_o + p_1, s, f"{labels[0]}+{labels[1]}")
    verdict_o = presence_verdict(wv_o, zero_tol)
    verdict_1 = presence_verdict(wv_1, zero_tol)
    verdict_sum = presence_verdict(wv_sum, zero_tol)
    contradiction = (
        verdict_o is Verdict.PRESENT and verdict_1 is Verdict.PRESENT and verdict_sum is Verdict.ABSENT
    )
    return ParadoxReport(wv_o, wv_1, wv_sum, verdict_o, verdict_1, verdict_sum, contradiction, zero_tol)


def indirect_channel_probability(wv: WeakValue, s: Scenario) -> float:
    """prob(in -> f via a_o) recovered from a complex weak value and prob(in -> f)"""
    return abs(wv.value) ** 2 * prob_transition(s)
