"""Pre/postselection timeline and strong (projective) measurement.

Time is symbolic: |in> at t_i, u_pre = U(t_m, t_i), one quiescent window at
t_m holding every meter, u_post = U(t_f, t_m), then postselection on |f>.
The window carries identity evolution by construction since no unitary can
be placed inside it.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .config import ROLE_TOL, VANISHING_AMPLITUDE
from .errors import DimensionError, NotUnitaryError, VanishingAmplitudeError
from .hilbert import (
    LinearOperator,
    OperatorRole,
    SpectralDecomposition,
    StateVector,
    apply_operator,
    from_projectors,
    inner_product,
    outer_product,
    validate,
)
from .meter import GaussianMeter
from .rng import RandomSource


@dataclass(frozen=True, eq=False)
class QuiescentWindow:
    """Meter events attached at t_m, in coupling order"""

    meter_events: Tuple[GaussianMeter, ...] = ()

    def labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.meter_events)

    def meter(self, label: str) -> GaussianMeter:
        for m in self.meter_events:
            if m.label == label:
                return m
        raise KeyError(f"no meter labelled {label!r}; have {list(self.labels())}")


@dataclass(frozen=True, eq=False)
class Scenario:
    preselected: StateVector
    postselected: StateVector
    u_pre: LinearOperator
    u_post: LinearOperator
    window: QuiescentWindow = field(default_factory=QuiescentWindow)
    name: str = "scenario"

    def __post_init__(self):
        dims = {
            "in": self.preselected.dim,
            "f": self.postselected.dim,
            "u_pre": self.u_pre.dim,
            "u_post": self.u_post.dim,
        }
        for meter in self.window.meter_events:
            dims[f"meter {meter.label}"] = meter.dim
        if len(set(dims.values())) != 1:
            raise DimensionError(f"scenario dimensions disagree: {dims}")
        for name, unitary in (("u_pre", self.u_pre), ("u_post", self.u_post)):
            if not validate(unitary, OperatorRole.UNITARY, ROLE_TOL):
                raise NotUnitaryError(f"{name} fails unitarity")
        labels = self.window.labels()
        if len(set(labels)) != len(labels):
            raise ValueError(f"meter labels must be unique, got {list(labels)}")
        amplitude = transition_amplitude(self)
        if abs(amplitude) < VANISHING_AMPLITUDE:
            raise VanishingAmplitudeError(
                f"|<f|U(t_f,t_i)|in>| = {abs(amplitude):.3g} is below {VANISHING_AMPLITUDE:g}"
            )

    @property
    def dim(self) -> int:
        return self.preselected.dim

    @classmethod
    def build(
        cls,
        preselected: StateVector,
        postselected: StateVector,
        u_pre: Optional[LinearOperator] = None,
        u_post: Optional[LinearOperator] = None,
        meters: Sequence[GaussianMeter] = (),
        name: str = "scenario",
    ) -> "Scenario":
        """Scenario with omitted unitaries defaulting to the identity"""
        dim = preselected.dim
        return cls(
            preselected,
            postselected,
            u_pre if u_pre is not None else LinearOperator.identity(dim),
            u_post if u_post is not None else LinearOperator.identity(dim),
            QuiescentWindow(tuple(meters)),
            name,
        )

    def evolved_state(self) -> StateVector:
        """U(t_m, t_i)|in>, the state the window meters act on"""
        return apply_operator(self.u_pre, self.preselected).normalized()

    def with_meters(self, meters: Sequence[GaussianMeter]) -> "Scenario":
        return replace(self, window=QuiescentWindow(tuple(meters)))

    def with_meter_strength(self, label: str, g: float) -> "Scenario":
        self.window.meter(label)
        meters = [m.with_strength(g) if m.label == label else m for m in self.window.meter_events]
        return self.with_meters(meters)


@dataclass(frozen=True, eq=False)
class StrongOutcome:
    eigenvalue_index: int
    probability: float
    collapsed: StateVector


# ---------------------------------------------------------------------------
# Transition amplitudes and probabilities
# ---------------------------------------------------------------------------


def transition_amplitude(s: Scenario) -> complex:
    """<f|u_post u_pre|in>"""
    evolved = apply_operator(s.u_post @ s.u_pre, s.preselected)
    return inner_product(s.postselected, evolved)


def prob_transition(s: Scenario) -> float:
    """prob(in -> f) = |<f|U(t_f,t_i)|in>|^2"""
    return abs(transition_amplitude(s)) ** 2


def _check_basis(s: Scenario, basis: SpectralDecomposition) -> None:
    if basis.dim != s.dim:
        raise DimensionError(f"basis has dim {basis.dim}, scenario has dim {s.dim}")


def prob_intermediate(s: Scenario, k: int, basis: SpectralDecomposition) -> float:
    """prob(in -> a_k) = ||Pi_k U(t_m,t_i)|in>||^2"""
    _check_basis(s, basis)
    projected = apply_operator(basis.projector(k), apply_operator(s.u_pre, s.preselected))
    return projected.norm_squared()


def channel_amplitude(s: Scenario, k: int, basis: SpectralDecomposition) -> complex:
    """<f|U(t_f,t_m) Pi_k U(t_m,t_i)|in>"""
    _check_basis(s, basis)
    through = s.u_post @ basis.projector(k) @ s.u_pre
    return inner_product(s.postselected, apply_operator(through, s.preselected))


def prob_via_channel(s: Scenario, k: int, basis: SpectralDecomposition) -> float:
    """prob(in -> f via a_k) exactly as the product of squared amplitudes.

    This is not normalized over outcomes: the sum over channels differs from
    prob_transition whenever the channels interfere.
    """
    return abs(channel_amplitude(s, k, basis)) ** 2


# ---------------------------------------------------------------------------
# Strong measurement
# ---------------------------------------------------------------------------


def born_probabilities(state: StateVector, basis: SpectralDecomposition) -> np.ndarray:
    if basis.dim != state.dim:
        raise DimensionError(f"basis has dim {basis.dim}, state has dim {state.dim}")
    probs = np.array([apply_operator(p, state).norm_squared() for p in basis.projectors])
    return probs


def strong_measure(state: StateVector, basis: SpectralDecomposition, rng: RandomSource) -> StrongOutcome:
    """Sample a projective outcome with Born weights and collapse onto it"""
    probs = born_probabilities(state, basis)
    cumulative = np.cumsum(probs)
    u = rng.uniform(0) * cumulative[-1]
    index = int(np.searchsorted(cumulative, u, side="right"))
    index = min(index, len(probs) - 1)
    collapsed = apply_operator(basis.projectors[index], state).normalized()
    return StrongOutcome(index, float(probs[index]), collapsed)


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

BOX_LABELS = ("A", "B", "C")


def labelled_basis(labels: Sequence[str]) -> SpectralDecomposition:
    """Computational basis with named kets; eigenvalue k on ket k"""
    dim = len(labels)
    kets = [StateVector.basis(dim, k) for k in range(dim)]
    return from_projectors([outer_product(k, k) for k in kets], labels=tuple(labels))


def label_projector(spec: str, labels: Sequence[str]) -> LinearOperator:
    """Projector onto a union of named basis kets, e.g. "A" or "A+C" """
    names = [part.strip() for part in spec.split("+") if part.strip()]
    if not names:
        raise ValueError(f"empty projector specification {spec!r}")
    lookup = {label.upper(): k for k, label in enumerate(labels)}
    if len(lookup) != len(labels):
        raise ValueError(f"basis labels {list(labels)} collide ignoring case")
    total = np.zeros((len(labels), len(labels)), dtype=np.complex128)
    for name in dict.fromkeys(n.upper() for n in names):
        if name not in lookup:
            raise ValueError(f"unknown basis label {name!r}; expected one of {', '.join(labels)}")
        total[lookup[name], lookup[name]] = 1.0
    return LinearOperator(total)


def box_basis() -> SpectralDecomposition:
    """Which-box observable of the three-box arrangement"""
    return labelled_basis(BOX_LABELS)


def box_projector(spec: str) -> LinearOperator:
    return label_projector(spec, BOX_LABELS)


def three_box(meters: Sequence[GaussianMeter] = ()) -> Scenario:
    """|in> = (|A>+|B>+|C>)/sqrt3, |f> = (|A>+|B>-|C>)/sqrt3, no internal evolution"""
    preselected = StateVector.normalize([1.0, 1.0, 1.0])
    postselected = StateVector.normalize([1.0, 1.0, -1.0])
    return Scenario.build(preselected, postselected, meters=meters, name="three-box")


# name -> (scenario factory taking meters, basis labels)
BUILTIN_SCENARIOS: Dict[str, Tuple[Callable[..., Scenario], Tuple[str, ...]]] = {
    "three-box": (three_box, BOX_LABELS),
}
