"""Exact finite-g von Neumann meters with Gaussian pointers.

The impulsive coupling exp(-i g A (x) P) translates the pointer wavefunction
by g*a_k on the eigenspace of a_k, so a system (x) meters state is always a
finite superposition of system components tagged with pointer shifts. Every
quantity below (postselection probability, pointer moments, reduced system
state) follows in closed form from the Gaussian overlap

    <phi(. - a)|phi(. - b)> = exp(-(a - b)^2 / (8 sigma^2))

with the idle pointer phi(q) = (2 pi sigma^2)^(-1/4) exp(-q^2 / (4 sigma^2))
centred at zero and hbar = 1.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from .config import BRANCH_PRUNE_TOL, DEFAULT_SIGMA, ZERO_POSTSELECTION
from .errors import DimensionError, ZeroNormError, ZeroPostselectionError
from .hilbert import (
    LinearOperator,
    SpectralDecomposition,
    StateVector,
    UnnormalizedVector,
    Vector,
    from_projectors,
    spectral_decompose,
)


def gaussian_overlap(a, b, sigma: float):
    """Overlap of two idle pointers translated by a and b"""
    diff = np.subtract(a, b)
    return np.exp(-(diff * diff) / (8.0 * sigma * sigma))


def idle_wavefunction(q, sigma: float):
    return (2.0 * np.pi * sigma * sigma) ** -0.25 * np.exp(-np.square(q) / (4.0 * sigma * sigma))


@dataclass(frozen=True, eq=False)
class GaussianMeter:
    """One von Neumann pointer measuring `observable` with strength g"""

    observable: SpectralDecomposition
    g: float
    sigma: float = DEFAULT_SIGMA
    label: str = "meter"

    def __post_init__(self):
        if not np.isfinite(self.g) or self.g < 0:
            raise ValueError(f"meter {self.label!r}: coupling g must be finite and >= 0, got {self.g}")
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"meter {self.label!r}: sigma must be > 0, got {self.sigma}")

    @property
    def dim(self) -> int:
        return self.observable.dim

    def with_strength(self, g: float) -> "GaussianMeter":
        return replace(self, g=float(g))

    @classmethod
    def for_projector(
        cls, projector: LinearOperator, g: float, sigma: float = DEFAULT_SIGMA, label: str = "meter"
    ) -> "GaussianMeter":
        """Meter reading a projector: eigenvalue 1 on its range, 0 on the complement"""
        complement = LinearOperator.identity(projector.dim) - projector
        members, values = [], []
        if np.linalg.norm(complement.entries) > BRANCH_PRUNE_TOL:
            members.append(complement)
            values.append(0.0)
        if np.linalg.norm(projector.entries) > BRANCH_PRUNE_TOL:
            members.append(projector)
            values.append(1.0)
        return cls(from_projectors(members, values), float(g), float(sigma), label)

    @classmethod
    def for_observable(
        cls, observable: LinearOperator, g: float, sigma: float = DEFAULT_SIGMA, label: str = "meter"
    ) -> "GaussianMeter":
        return cls(spectral_decompose(observable), float(g), float(sigma), label)


@dataclass(frozen=True, eq=False)
class Branch:
    component: UnnormalizedVector
    shifts: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class BranchedJointState:
    """System (x) meters state as components tagged with one pointer shift per meter"""

    meters: Tuple[GaussianMeter, ...]
    branches: Tuple[Branch, ...]

    @classmethod
    def idle(cls, state: Vector) -> "BranchedJointState":
        """Uncoupled system state, no meters attached yet"""
        return cls((), (Branch(UnnormalizedVector(state.amplitudes), ()),))

    @property
    def dim(self) -> int:
        return self.branches[0].component.dim

    def components(self) -> np.ndarray:
        """dim x B matrix whose columns are the branch components"""
        return np.column_stack([b.component.amplitudes for b in self.branches])

    def shift_matrix(self) -> np.ndarray:
        """B x M matrix of pointer shifts"""
        return np.array([b.shifts for b in self.branches], dtype=np.float64).reshape(
            len(self.branches), len(self.meters)
        )

    def meter_overlaps(self, skip: Optional[int] = None) -> np.ndarray:
        """B x B product of pairwise pointer overlaps over all meters except `skip`"""
        shifts = self.shift_matrix()
        overlaps = np.ones((len(self.branches), len(self.branches)))
        for m, meter in enumerate(self.meters):
            if m == skip:
                continue
            column = shifts[:, m]
            overlaps = overlaps * gaussian_overlap(column[:, None], column[None, :], meter.sigma)
        return overlaps

    def norm_squared(self) -> float:
        comps = self.components()
        gram = comps.conj().T @ comps
        return float(np.sum(gram * self.meter_overlaps()).real)


@dataclass(frozen=True, eq=False)
class PointerState:
    """Postselected, unnormalized pointer state sum_k c_k phi(q - shift_k).

    `coherence` holds the pairwise factors left over from tracing the other
    meters; it is all ones when this is the only meter.
    """

    meter: GaussianMeter
    coefficients: np.ndarray
    shifts: np.ndarray
    coherence: np.ndarray

    @classmethod
    def pure(cls, meter: GaussianMeter, terms: Sequence[Tuple[complex, float]]) -> "PointerState":
        coefficients = np.array([c for c, _ in terms], dtype=np.complex128)
        shifts = np.array([s for _, s in terms], dtype=np.float64)
        return cls(meter, coefficients, shifts, np.ones((len(terms), len(terms))))

    def _weights(self) -> np.ndarray:
        """conj(c_k) c_l K_kl overlap_kl"""
        overlap = gaussian_overlap(self.shifts[:, None], self.shifts[None, :], self.meter.sigma)
        return np.outer(self.coefficients.conj(), self.coefficients) * self.coherence * overlap

    def norm_squared(self) -> float:
        return float(np.sum(self._weights()).real)

    def density(self, q) -> np.ndarray:
        """Unnormalized |psi(q)|^2 on an array of positions"""
        q = np.asarray(q, dtype=np.float64)
        phis = idle_wavefunction(q[..., None] - self.shifts, self.meter.sigma)
        pair = np.einsum("...k,...l,kl->...", phis, phis, np.outer(self.coefficients.conj(), self.coefficients) * self.coherence)
        return np.real(pair)

    def cdf(self, q) -> np.ndarray:
        """Unnormalized cumulative density, closed form over Gaussian pairs"""
        q = np.asarray(q, dtype=np.float64)
        weights = np.real(self._weights())
        centres = 0.5 * (self.shifts[:, None] + self.shifts[None, :])
        z = (q[..., None, None] - centres) / self.meter.sigma
        return np.sum(weights * ndtr(z), axis=(-2, -1))


def couple(joint: BranchedJointState, meter: GaussianMeter) -> BranchedJointState:
    """Apply exp(-i g A (x) P) for a new meter: each branch splits over the eigenprojectors of A"""
    if meter.dim != joint.dim:
        raise DimensionError(f"meter {meter.label!r} has dim {meter.dim}, system has dim {joint.dim}")

    merged: Dict[Tuple[float, ...], np.ndarray] = {}
    for branch in joint.branches:
        for value, proj in zip(meter.observable.eigenvalues, meter.observable.projectors):
            component = proj.entries @ branch.component.amplitudes
            if np.linalg.norm(component) < BRANCH_PRUNE_TOL:
                continue
            # P generates translations: the pointer moves by g * a_k
            key = branch.shifts + (meter.g * value,)
            if key in merged:
                merged[key] = merged[key] + component
            else:
                merged[key] = component

    branches = tuple(
        Branch(UnnormalizedVector(component), shifts)
        for shifts, component in merged.items()
        if np.linalg.norm(component) >= BRANCH_PRUNE_TOL
    )
    return BranchedJointState(joint.meters + (meter,), branches)


def evolve(joint: BranchedJointState, unitary: LinearOperator) -> BranchedJointState:
    """Free system evolution after the window; pointers are untouched"""
    if unitary.dim != joint.dim:
        raise DimensionError(f"unitary has dim {unitary.dim}, system has dim {joint.dim}")
    branches = tuple(
        Branch(UnnormalizedVector(unitary.entries @ b.component.amplitudes), b.shifts) for b in joint.branches
    )
    return BranchedJointState(joint.meters, branches)


def window_joint_state(
    state: Vector, meters: Sequence[GaussianMeter], u_post: Optional[LinearOperator] = None
) -> BranchedJointState:
    """Couple every meter in window order to `state`, then evolve by u_post"""
    joint = BranchedJointState.idle(state)
    for meter in meters:
        joint = couple(joint, meter)
    if u_post is not None:
        joint = evolve(joint, u_post)
    return joint


def postselected_amplitudes(joint: BranchedJointState, f: StateVector) -> np.ndarray:
    """<f|component_i> for every branch"""
    if f.dim != joint.dim:
        raise DimensionError(f"postselected state has dim {f.dim}, system has dim {joint.dim}")
    return f.amplitudes.conj() @ joint.components()


def postselect(joint: BranchedJointState, f: StateVector) -> Tuple[float, List[PointerState]]:
    """Project every branch onto <f|; return acceptance probability and one pointer state per meter"""
    amplitudes = postselected_amplitudes(joint, f)
    weights = np.outer(amplitudes.conj(), amplitudes)
    prob = float(np.sum(weights * joint.meter_overlaps()).real)
    if prob < ZERO_POSTSELECTION:
        raise ZeroPostselectionError(f"postselection probability {prob:.3g} is below {ZERO_POSTSELECTION:g}")

    shifts = joint.shift_matrix()
    pointers = [
        PointerState(meter, amplitudes.copy(), shifts[:, m].copy(), joint.meter_overlaps(skip=m))
        for m, meter in enumerate(joint.meters)
    ]
    return prob, pointers


def pointer_expectations(p: PointerState) -> Tuple[float, float]:
    """Normalized <Q> and <P> of a postselected pointer state"""
    weights = p._weights()
    norm = float(np.sum(weights).real)
    if norm <= 0.0:
        raise ZeroNormError(f"pointer state for meter {p.meter.label!r} has zero norm")
    s_k = p.shifts[:, None]
    s_l = p.shifts[None, :]
    mean_q = np.sum(weights * 0.5 * (s_k + s_l)).real / norm
    mean_p = np.sum(weights * 1j * (s_k - s_l) / (4.0 * p.meter.sigma ** 2)).real / norm
    return float(mean_q), float(mean_p)


def weak_limit_readout(p: PointerState, g: float) -> complex:
    """<Q>/g + i 2 sigma^2 <P>/g, which tends to the complex weak value as g -> 0"""
    if g <= 0:
        raise ValueError(f"readout needs g > 0, got {g}")
    mean_q, mean_p = pointer_expectations(p)
    return complex(mean_q / g, 2.0 * p.meter.sigma ** 2 * mean_p / g)


def reduced_density_matrix(joint: BranchedJointState) -> np.ndarray:
    """System state with every pointer traced out"""
    comps = joint.components()
    return comps @ joint.meter_overlaps() @ comps.conj().T


def reduced_state_fidelity(joint: BranchedJointState, reference: StateVector) -> float:
    """<reference|rho|reference> for the meter-traced system state"""
    if reference.dim != joint.dim:
        raise DimensionError(f"reference has dim {reference.dim}, system has dim {joint.dim}")
    rho = reduced_density_matrix(joint)
    fidelity = float(np.real(reference.amplitudes.conj() @ rho @ reference.amplitudes))
    return min(1.0, max(0.0, fidelity))
