"""Reading and writing scenario files.

A scenario file is a JSON document::

    {
      "dim": 2,
      "state": [[1, 0], [0, 0]],
      "measurements": {
        "gender":    {"labels": ["F", "M"], "span": [[[1, 0], [0, 0]]]},
        "treatment": {"labels": ["T", "U"], "span": [[[1, 0], [0, 0]]]},
        "result":    {"labels": ["A", "D"], "span": [[[1, 0], [0, 0]]],
                      "second_span": [[[0, 0], [1, 0]]]}
      }
    }

Complex numbers are ``[re, im]`` pairs. ``span`` lists vectors spanning the
first outcome's eigenspace; the second projector is always identity minus
the first. An optional ``second_span`` is checked against that complement.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .engine import (
    GENDER_LABELS,
    RESULT_LABELS,
    TREATMENT_LABELS,
    MeasurementScenario,
    TwoOutcomeMeasurement,
)
from .errors import ParseError, RankDeficient, ValidationError
from .linalg import VALIDATION_TOL, Projector, StateVector, norm_sq, projector_from_span, range_basis

MEASUREMENTS = {"gender": GENDER_LABELS, "treatment": TREATMENT_LABELS, "result": RESULT_LABELS}


def _real(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{path}: expected a number, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise ParseError(f"{path}: number must be finite")
    return x


def _complex_vector(node, dim: int, path: str) -> np.ndarray:
    if not isinstance(node, list):
        raise ParseError(f"{path}: expected a list of [re, im] pairs")
    if len(node) != dim:
        raise ParseError(f"{path}: has {len(node)} entries but dim is {dim}")
    out = np.empty(dim, dtype=np.complex128)
    for i, pair in enumerate(node):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{path}[{i}]: expected an [re, im] pair")
        out[i] = complex(_real(pair[0], f"{path}[{i}][0]"), _real(pair[1], f"{path}[{i}][1]"))
    return out


def _span(node, dim: int, path: str) -> list[StateVector]:
    if not isinstance(node, list):
        raise ParseError(f"{path}: expected a list of vectors")
    return [StateVector(_complex_vector(v, dim, f"{path}[{k}]")) for k, v in enumerate(node)]


def _projector(vectors: list[StateVector], dim: int) -> Projector:
    # an empty span is the zero projector
    return projector_from_span(vectors) if vectors else Projector.zero(dim)


def _measurement(name: str, node, dim: int) -> TwoOutcomeMeasurement:
    path = f"measurements.{name}"
    if not isinstance(node, dict):
        raise ParseError(f"{path}: expected an object")
    unknown = set(node) - {"labels", "span", "second_span"}
    if unknown:
        raise ParseError(f"{path}: unknown field(s) {sorted(unknown)}")
    expected = MEASUREMENTS[name]
    labels = node.get("labels", list(expected))
    if labels != list(expected):
        raise ParseError(f"{path}.labels: expected {list(expected)}, got {labels!r}")
    if "span" not in node:
        raise ParseError(f"{path}.span: missing")
    vectors = _span(node["span"], dim, f"{path}.span")
    try:
        m = TwoOutcomeMeasurement.from_projector(expected, _projector(vectors, dim))
    except RankDeficient as exc:
        raise ValidationError(f"{path}.span: {exc}") from None
    if "second_span" in node:
        others = _span(node["second_span"], dim, f"{path}.second_span")
        try:
            second = _projector(others, dim)
        except RankDeficient as exc:
            raise ValidationError(f"{path}.second_span: {exc}") from None
        resid = float(np.max(np.abs(second.matrix - m.second.matrix)))
        if resid > VALIDATION_TOL:
            raise ValidationError(
                f"{path}: second_span is not the orthogonal complement of span (residual {resid:.3g})"
            )
    return m


def parse_scenario(text: str) -> MeasurementScenario:
    """Parse and validate a scenario document.

    Raises ParseError for malformed input (with line/column or field path)
    and ValidationError when the content does not describe a valid scenario.
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")
    unknown = set(doc) - {"dim", "state", "measurements"}
    if unknown:
        raise ParseError(f"top level: unknown field(s) {sorted(unknown)}")
    for key in ("dim", "state", "measurements"):
        if key not in doc:
            raise ParseError(f"{key}: missing")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError(f"dim: expected a positive integer, got {dim!r}")
    state = StateVector(_complex_vector(doc["state"], dim, "state"))
    if norm_sq(state) == 0.0:
        raise ValidationError("state: zero vector")
    ms = doc["measurements"]
    if not isinstance(ms, dict):
        raise ParseError("measurements: expected an object")
    for name in MEASUREMENTS:
        if name not in ms:
            raise ParseError(f"measurements.{name}: missing")
    extra = set(ms) - set(MEASUREMENTS)
    if extra:
        raise ParseError(f"measurements: unknown field(s) {sorted(extra)}")
    parts = [_measurement(name, ms[name], dim) for name in MEASUREMENTS]
    return MeasurementScenario(state, *parts)


def _reject_constant(name: str):
    raise ParseError(f"non-finite constant {name} is not allowed")


def load_scenario(path: Union[str, Path]) -> MeasurementScenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _pair(z: complex) -> str:
    return f"[{float(z.real)!r}, {float(z.imag)!r}]"


def _vector(amps) -> str:
    return "[" + ", ".join(_pair(z) for z in amps) + "]"


def serialize_scenario(scenario: MeasurementScenario) -> str:
    """Scenario as a document ``parse_scenario`` accepts.

    Floats are written with ``repr`` (shortest round-trip form), so state
    amplitudes survive exactly; spans are orthonormal bases of each range.
    """
    lines = ["{", f'  "dim": {scenario.dim},', f'  "state": {_vector(scenario.state.amps)},', '  "measurements": {']
    blocks = []
    for name, m in zip(MEASUREMENTS, scenario.measurements):
        span = range_basis(m.first)
        vecs = ",\n".join(f"        {_vector(v.amps)}" for v in span)
        body = f"\n{vecs}\n      " if span else ""
        blocks.append(
            f'    "{name}": {{\n'
            f'      "labels": {json.dumps(list(m.labels))},\n'
            f'      "span": [{body}]\n'
            f"    }}"
        )
    lines.append(",\n".join(blocks))
    lines += ["  }", "}", ""]
    return "\n".join(lines)


def fixture_path(name: str) -> Path:
    """Path of a bundled example scenario, e.g. ``"q1.scenario"``."""
    from importlib.resources import files

    return Path(str(files("qsimpson") / "data" / name))
