"""Finite-dimensional complex linear algebra: states, operators, projectors, spectra.

All values are immutable: arrays are copied on construction and marked
read-only, so instances can be shared freely between threads.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEGENERACY_TOL, NORM_TOL, ROLE_TOL
from .errors import (
    DimensionError,
    NotHermitianError,
    NotNormalizedError,
    NotOrthogonalError,
    ZeroNormError,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


class OperatorRole(str, Enum):
    UNITARY = "unitary"
    HERMITIAN = "hermitian"
    PROJECTOR = "projector"


@dataclass(frozen=True, eq=False)
class UnnormalizedVector:
    """Intermediate ket such as Pi|psi>; never a valid StateVector by itself"""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"expected a non-empty 1-d amplitude array, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "StateVector":
        norm = np.sqrt(self.norm_squared())
        if norm == 0.0:
            raise ZeroNormError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / norm)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm ket |psi> of a dim-dimensional system"""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"expected a non-empty 1-d amplitude array, got shape {amps.shape}")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"squared norm is {norm_sq!r}, expected 1 within {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def normalize(cls, amplitudes: Sequence[complex]) -> "StateVector":
        """Build a state from arbitrary non-zero amplitudes"""
        return UnnormalizedVector(np.asarray(amplitudes, dtype=np.complex128)).normalized()

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)


Vector = Union[StateVector, UnnormalizedVector]


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Dense dim x dim complex matrix"""

    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise DimensionError(f"operator must be square and non-empty, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "LinearOperator":
        return cls(np.eye(dim, dtype=np.complex128))

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.entries.conj().T)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        _check_dims(self.dim, other.dim)
        return LinearOperator(self.entries @ other.entries)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _check_dims(self.dim, other.dim)
        return LinearOperator(self.entries + other.entries)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _check_dims(self.dim, other.dim)
        return LinearOperator(self.entries - other.entries)

    def scaled(self, factor: complex) -> "LinearOperator":
        return LinearOperator(self.entries * factor)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """A = sum_k a_k Pi_k with mutually orthogonal, complete projectors"""

    eigenvalues: Tuple[float, ...]
    projectors: Tuple[LinearOperator, ...]
    multiplicities: Tuple[int, ...]
    labels: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        n = len(self.eigenvalues)
        if not (len(self.projectors) == len(self.multiplicities) == n) or n == 0:
            raise ValueError("eigenvalues, projectors and multiplicities must be equally long and non-empty")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError(f"expected {n} labels, got {len(self.labels)}")
        dims = {p.dim for p in self.projectors}
        if len(dims) != 1:
            raise DimensionError(f"projectors of mixed dimension {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def label(self, k: int) -> str:
        if self.labels is not None:
            return self.labels[k]
        return f"a={self.eigenvalues[k]:.6g}"

    def projector(self, k: int) -> LinearOperator:
        if not 0 <= k < len(self):
            raise IndexError(f"channel index {k} out of range for {len(self)} channels")
        return self.projectors[k]

    def reconstruct(self) -> LinearOperator:
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for value, proj in zip(self.eigenvalues, self.projectors):
            total = total + value * proj.entries
        return LinearOperator(total)


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def inner_product(bra: Vector, ket: Vector) -> complex:
    """<bra|ket>, conjugating the bra"""
    _check_dims(bra.dim, ket.dim)
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def apply_operator(op: LinearOperator, ket: Vector) -> UnnormalizedVector:
    _check_dims(op.dim, ket.dim)
    return UnnormalizedVector(op.entries @ ket.amplitudes)


def outer_product(ket: Vector, bra: Vector) -> LinearOperator:
    """|ket><bra|"""
    _check_dims(ket.dim, bra.dim)
    return LinearOperator(np.outer(ket.amplitudes, bra.amplitudes.conj()))


def validate(op: LinearOperator, role: Union[OperatorRole, str], tol: float = ROLE_TOL) -> bool:
    """True iff the role's defining identity holds entrywise within `tol`"""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    role = OperatorRole(role)
    m = op.entries
    adjoint = op.adjoint().entries
    if role is OperatorRole.UNITARY:
        return bool(np.allclose(adjoint @ m, np.eye(op.dim), rtol=0.0, atol=tol))
    hermitian = bool(np.allclose(m, adjoint, rtol=0.0, atol=tol))
    if role is OperatorRole.HERMITIAN:
        return hermitian
    return hermitian and bool(np.allclose(m @ m, m, rtol=0.0, atol=tol))


def spectral_decompose(
    op: LinearOperator,
    merge_tol: float = DEGENERACY_TOL,
    labels: Optional[Sequence[str]] = None,
) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian operator into ascending eigenvalues and merged eigenprojectors"""
    if not validate(op, OperatorRole.HERMITIAN, ROLE_TOL):
        raise NotHermitianError("operator is not Hermitian within tolerance")
    hermitian = 0.5 * (op.entries + op.entries.conj().T)
    values, vectors = np.linalg.eigh(hermitian)

    # eigh returns ascending values; group runs closer than merge_tol
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] < merge_tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues, projectors, multiplicities = [], [], []
    for group in groups:
        block = vectors[:, group]
        eigenvalues.append(float(np.mean(values[group])))
        projectors.append(LinearOperator(block @ block.conj().T))
        multiplicities.append(len(group))

    return SpectralDecomposition(
        tuple(eigenvalues),
        tuple(projectors),
        tuple(multiplicities),
        tuple(labels) if labels is not None else None,
    )


def from_projectors(
    projectors: Sequence[LinearOperator],
    eigenvalues: Optional[Sequence[float]] = None,
    labels: Optional[Sequence[str]] = None,
    tol: float = ROLE_TOL,
) -> SpectralDecomposition:
    """Assemble a decomposition from an explicit complete orthogonal projector family.

    Eigenvalues default to the channel indices 0, 1, 2, ... which is what a
    "which box" observable needs.
    """
    if not projectors:
        raise ValueError("need at least one projector")
    _check_dims(*(p.dim for p in projectors))
    dim = projectors[0].dim
    for k, proj in enumerate(projectors):
        if not validate(proj, OperatorRole.PROJECTOR, tol):
            raise ValueError(f"member {k} of the projector family is not a projector")
    for j in range(len(projectors)):
        for k in range(j + 1, len(projectors)):
            if not np.allclose(projectors[j].entries @ projectors[k].entries, 0.0, rtol=0.0, atol=tol):
                raise NotOrthogonalError(f"projectors {j} and {k} are not orthogonal")
    total = sum((p.entries for p in projectors), np.zeros((dim, dim), dtype=np.complex128))
    if not np.allclose(total, np.eye(dim), rtol=0.0, atol=tol):
        raise ValueError("projector family is not complete (does not sum to identity)")

    values = tuple(float(v) for v in eigenvalues) if eigenvalues is not None else tuple(
        float(k) for k in range(len(projectors))
    )
    ranks = tuple(int(round(p.trace().real)) for p in projectors)
    return SpectralDecomposition(values, tuple(projectors), ranks, tuple(labels) if labels is not None else None)


def projector_onto(kets: Sequence[Vector]) -> LinearOperator:
    """Orthogonal projector onto the span of the given kets"""
    if not kets:
        raise ValueError("need at least one ket")
    _check_dims(*(k.dim for k in kets))
    matrix = np.column_stack([k.amplitudes for k in kets])
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    span = u[:, s > DEGENERACY_TOL]
    if span.shape[1] == 0:
        raise ZeroNormError("kets span only the zero vector")
    return LinearOperator(span @ span.conj().T)
