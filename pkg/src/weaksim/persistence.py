"""Scenario document loading and report persistence"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import DEFAULT_SIGMA
from .errors import (
    NotUnitaryError,
    ScenarioDocumentError,
    VanishingAmplitudeError,
    WeakSimError,
)
from .hilbert import LinearOperator, SpectralDecomposition, StateVector, UnnormalizedVector, projector_onto
from .meter import GaussianMeter
from .scenario import BUILTIN_SCENARIOS, Scenario, label_projector, labelled_basis
from .utils import log

ComplexPair = Tuple[float, float]
Matrix = List[List[ComplexPair]]


class MeterDocument(BaseModel):
    """One meter event: exactly one of `observable`, `projector` (spanning kets) or `channels`"""

    model_config = ConfigDict(extra="forbid")

    label: str
    g: float = Field(ge=0)
    sigma: float = Field(DEFAULT_SIGMA, gt=0)
    observable: Optional[Matrix] = None
    projector: Optional[List[List[ComplexPair]]] = None
    channels: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "MeterDocument":
        given = [name for name in ("observable", "projector", "channels") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"give exactly one of observable, projector, channels (got {given or 'none'})")
        return self


class ScenarioDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = "scenario"
    dim: int = Field(gt=0, le=64)
    in_: List[ComplexPair] = Field(alias="in")
    f: List[ComplexPair]
    u_pre: Optional[Matrix] = None
    u_post: Optional[Matrix] = None
    basis_labels: Optional[List[str]] = None
    projectors: Dict[str, List[List[ComplexPair]]] = Field(default_factory=dict)
    meters: List[MeterDocument] = Field(default_factory=list)


@dataclass(frozen=True, eq=False)
class ScenarioBundle:
    """A scenario plus the named operators the reports refer to"""

    scenario: Scenario
    basis: SpectralDecomposition
    projectors: Dict[str, LinearOperator] = field(default_factory=dict)
    source: str = "builtin"

    @property
    def basis_labels(self) -> Tuple[str, ...]:
        return tuple(self.basis.label(k) for k in range(len(self.basis)))

    def projector(self, spec: str) -> LinearOperator:
        """Named document projector, or a union of basis kets such as "A+C" """
        if spec in self.projectors:
            return self.projectors[spec]
        return label_projector(spec, self.basis_labels)

    def with_meters(self, meters: Sequence[GaussianMeter]) -> "ScenarioBundle":
        return ScenarioBundle(self.scenario.with_meters(meters), self.basis, self.projectors, self.source)


# ---------------------------------------------------------------------------
# Document -> numpy conversion
# ---------------------------------------------------------------------------


def _vector(pairs: Sequence[ComplexPair], dim: int, where: str) -> np.ndarray:
    if len(pairs) != dim:
        raise ScenarioDocumentError(where, f"expected {dim} amplitudes, got {len(pairs)}")
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _matrix(rows: Matrix, dim: int, where: str) -> LinearOperator:
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise ScenarioDocumentError(where, f"expected a {dim}x{dim} row-major matrix")
    return LinearOperator(np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128))


def _state(pairs: Sequence[ComplexPair], dim: int, where: str) -> StateVector:
    amplitudes = _vector(pairs, dim, where)
    vector = UnnormalizedVector(amplitudes)
    if vector.norm_squared() == 0.0:
        raise ScenarioDocumentError(where, "state is the zero vector")
    if abs(vector.norm_squared() - 1.0) > 1e-10:
        log("persistence", f"normalizing {where} (squared norm {vector.norm_squared():.6g})")
    return vector.normalized()


def _span_projector(kets: List[List[ComplexPair]], dim: int, where: str) -> LinearOperator:
    if not kets:
        raise ScenarioDocumentError(where, "needs at least one ket")
    vectors = [UnnormalizedVector(_vector(ket, dim, f"{where}.{i}")) for i, ket in enumerate(kets)]
    try:
        return projector_onto(vectors)
    except WeakSimError as e:
        raise ScenarioDocumentError(where, str(e), e) from e


def _meter(doc: MeterDocument, dim: int, labels: Sequence[str], where: str) -> GaussianMeter:
    try:
        if doc.observable is not None:
            return GaussianMeter.for_observable(_matrix(doc.observable, dim, f"{where}.observable"), doc.g, doc.sigma, doc.label)
        if doc.projector is not None:
            return GaussianMeter.for_projector(_span_projector(doc.projector, dim, f"{where}.projector"), doc.g, doc.sigma, doc.label)
        return GaussianMeter.for_projector(label_projector(doc.channels, labels), doc.g, doc.sigma, doc.label)
    except ScenarioDocumentError:
        raise
    except ValueError as e:
        raise ScenarioDocumentError(where, str(e), e) from e


def bundle_from_document(doc: ScenarioDocument, source: str = "document") -> ScenarioBundle:
    dim = doc.dim
    labels = tuple(doc.basis_labels) if doc.basis_labels is not None else tuple(str(k) for k in range(dim))
    if len(labels) != dim or len({label.upper() for label in labels}) != dim:
        raise ScenarioDocumentError("basis_labels", f"need {dim} labels, distinct ignoring case")

    preselected = _state(doc.in_, dim, "in")
    postselected = _state(doc.f, dim, "f")
    u_pre = _matrix(doc.u_pre, dim, "u_pre") if doc.u_pre is not None else None
    u_post = _matrix(doc.u_post, dim, "u_post") if doc.u_post is not None else None
    projectors = {
        name: _span_projector(kets, dim, f"projectors.{name}") for name, kets in doc.projectors.items()
    }
    meters = [_meter(m, dim, labels, f"meters.{i}") for i, m in enumerate(doc.meters)]

    try:
        scenario = Scenario.build(preselected, postselected, u_pre, u_post, meters, doc.name)
    except NotUnitaryError as e:
        # "u_pre fails unitarity" / "u_post fails unitarity"
        raise ScenarioDocumentError(str(e).split()[0], str(e), e) from e
    except VanishingAmplitudeError as e:
        raise ScenarioDocumentError("f", f"vanishing denominator: {e}", e) from e
    except ValueError as e:
        raise ScenarioDocumentError("meters", str(e), e) from e

    return ScenarioBundle(scenario, labelled_basis(labels), projectors, source)


def parse_scenario_document(data: Union[dict, str]) -> ScenarioBundle:
    """Validate a JSON-compatible tree (or its text) and build the bundle"""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise ScenarioDocumentError("document", f"not valid JSON: {e}", e) from e
    try:
        doc = ScenarioDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "document"
        raise ScenarioDocumentError(where, first["msg"], e) from e
    return bundle_from_document(doc)


def load_scenario_document(path: Union[str, Path]) -> ScenarioBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioDocumentError("path", f"cannot read {path}: {e}", e) from e
    bundle = parse_scenario_document(text)
    log("persistence", f"loaded scenario {bundle.scenario.name!r} (dim {bundle.scenario.dim}) from {path}")
    return ScenarioBundle(bundle.scenario, bundle.basis, bundle.projectors, str(path))


def builtin_bundle(name: str, meters: Sequence[GaussianMeter] = ()) -> ScenarioBundle:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioDocumentError("builtin", f"unknown built-in {name!r}; have {', '.join(BUILTIN_SCENARIOS)}")
    factory, labels = BUILTIN_SCENARIOS[name]
    return ScenarioBundle(factory(meters), labelled_basis(labels), {}, f"builtin:{name}")


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def save_report(text: str, path: Union[str, Path]) -> str:
    """Write a rendered report and return its path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log("persistence", f"report saved: {path}")
    return str(path)
