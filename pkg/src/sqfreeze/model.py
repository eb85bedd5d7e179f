"""Ising and QUBO problem models, energy evaluation, transforms, and freezing.

The Ising energy convention used throughout the package is

    E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset,    s_i in {-1, +1}

and the QUBO counterpart is

    E(x) = sum_i a_i x_i + sum_{i<j} b_ij x_i x_j + offset,    x_i in {0, 1}.

Variables carry opaque labels (all ints or all strs within one model) so that
reduced models produced by :func:`freeze` keep the original variable names.
Models are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import AssignmentMismatchError, ProblemFormatError, ValidationError

Label = Union[int, str]
Pair = tuple[Label, Label]

__all__ = [
    "Label",
    "IsingModel",
    "QuboModel",
    "SpinAssignment",
    "FreezeDirective",
    "energy",
    "qubo_energy",
    "qubo_to_ising",
    "ising_to_qubo",
    "freeze",
    "reconstruct",
    "problem_to_dict",
    "problem_from_dict",
    "save_problem",
    "load_problem",
]


def _check_finite(value: float, what: str) -> float:
    out = float(value)
    if not math.isfinite(out):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return out


def _normalize_labels(labels: Iterable[Label]) -> tuple[Label, ...]:
    out = tuple(labels)
    if len(set(out)) != len(out):
        raise ValidationError("duplicate labels")
    kinds = {type(lab) for lab in out}
    if not kinds <= {int, str}:
        raise ValidationError(f"labels must be ints or strs, got {kinds}")
    if len(kinds) > 1:
        raise ValidationError("labels must not mix ints and strs")
    return out


def _normalize_linear(
    entries: Mapping[Label, float], positions: Mapping[Label, int], what: str
) -> dict[Label, float]:
    # Every label gets an entry (missing coefficients default to 0.0) so that
    # equality, serialization, and array views are all order-deterministic.
    out = {lab: 0.0 for lab in positions}
    for lab, value in entries.items():
        if lab not in positions:
            raise ValidationError(f"{what} for unknown label {lab!r}")
        out[lab] = _check_finite(value, f"{what} of {lab!r}")
    return out


def _normalize_quadratic(
    entries: Mapping[Pair, float] | Iterable[tuple[Label, Label, float]],
    positions: Mapping[Label, int],
    what: str,
) -> dict[Pair, float]:
    if isinstance(entries, Mapping):
        triples: Iterable[tuple[Label, Label, float]] = (
            (a, b, v) for (a, b), v in entries.items()
        )
    else:
        triples = entries
    acc: dict[Pair, float] = {}
    for a, b, value in triples:
        if a not in positions or b not in positions:
            raise ValidationError(f"{what} references unknown label in ({a!r}, {b!r})")
        if a == b:
            raise ValidationError(f"self-coupling on label {a!r}")
        # Canonical key: ordered by label position; duplicate insertions sum.
        key = (a, b) if positions[a] < positions[b] else (b, a)
        acc[key] = acc.get(key, 0.0) + _check_finite(value, f"{what} of ({a!r}, {b!r})")
    ordered = sorted(acc, key=lambda p: (positions[p[0]], positions[p[1]]))
    return {key: acc[key] for key in ordered}


@dataclass(frozen=True)
class IsingModel:
    """Classical Ising Hamiltonian over labelled spin variables.

    Attributes:
        labels: Ordered variable identifiers; defines all tie-break and
            serialization order downstream.
        biases: Per-variable linear coefficients h_i, complete over labels.
        couplings: Pairwise coefficients J_ij keyed by canonical (earlier,
            later) label pairs.
        offset: Constant added to every energy.
    """

    labels: tuple[Label, ...]
    biases: Mapping[Label, float] = field(default_factory=dict)
    couplings: Mapping[Pair, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        labels = _normalize_labels(self.labels)
        positions = {lab: k for k, lab in enumerate(labels)}
        object.__setattr__(self, "labels", labels)
        object.__setattr__(
            self, "biases", _normalize_linear(self.biases, positions, "bias")
        )
        object.__setattr__(
            self, "couplings", _normalize_quadratic(self.couplings, positions, "coupling")
        )
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))

    @property
    def num_vars(self) -> int:
        return len(self.labels)

    def positions(self) -> dict[Label, int]:
        return {lab: k for k, lab in enumerate(self.labels)}

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Array view: (h, rows, cols, vals) with pair indices row < col."""
        pos = self.positions()
        h = np.array([self.biases[lab] for lab in self.labels], dtype=np.float64)
        rows = np.array([pos[a] for a, _ in self.couplings], dtype=np.int64)
        cols = np.array([pos[b] for _, b in self.couplings], dtype=np.int64)
        vals = np.array(list(self.couplings.values()), dtype=np.float64)
        return h, rows, cols, vals

    def dense_coupling_matrix(self) -> np.ndarray:
        """Upper-triangular (n, n) coupling matrix in label-position order."""
        n = self.num_vars
        mat = np.zeros((n, n), dtype=np.float64)
        _, rows, cols, vals = self.to_arrays()
        mat[rows, cols] = vals
        return mat


@dataclass(frozen=True)
class QuboModel:
    """Quadratic unconstrained binary model over the same label conventions."""

    labels: tuple[Label, ...]
    linear: Mapping[Label, float] = field(default_factory=dict)
    quadratic: Mapping[Pair, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        labels = _normalize_labels(self.labels)
        positions = {lab: k for k, lab in enumerate(labels)}
        object.__setattr__(self, "labels", labels)
        object.__setattr__(
            self, "linear", _normalize_linear(self.linear, positions, "linear term")
        )
        object.__setattr__(
            self,
            "quadratic",
            _normalize_quadratic(self.quadratic, positions, "quadratic term"),
        )
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))

    @property
    def num_vars(self) -> int:
        return len(self.labels)


def _normalize_values(
    values: Mapping[Label, int], allowed: tuple[int, ...], what: str
) -> dict[Label, int]:
    out: dict[Label, int] = {}
    for lab, raw in values.items():
        v = int(raw)
        if v != raw or v not in allowed:
            raise ValidationError(f"{what} for {lab!r} must be in {allowed}, got {raw!r}")
        out[lab] = v
    return out


@dataclass(frozen=True)
class SpinAssignment:
    """A full assignment of spins, label -> value in {-1, +1}."""

    values: Mapping[Label, int]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", _normalize_values(self.values, (-1, 1), "spin value")
        )

    def as_tuple(self, labels: Sequence[Label]) -> tuple[int, ...]:
        try:
            return tuple(self.values[lab] for lab in labels)
        except KeyError as exc:
            raise AssignmentMismatchError(f"assignment missing label {exc.args[0]!r}") from exc


@dataclass(frozen=True)
class FreezeDirective:
    """Labels to fix and the values to fix them at, label -> value in {-1, +1}."""

    frozen: Mapping[Label, int]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "frozen", _normalize_values(self.frozen, (-1, 1), "frozen value")
        )


def _require_same_labels(model_labels: Sequence[Label], values: Mapping[Label, int]) -> None:
    missing = [lab for lab in model_labels if lab not in values]
    if missing:
        raise AssignmentMismatchError(f"assignment missing labels {missing[:5]!r}")
    if len(values) != len(model_labels):
        extra = sorted(set(values) - set(model_labels), key=repr)
        raise AssignmentMismatchError(f"assignment has extra labels {extra[:5]!r}")


def energy(model: IsingModel, x: SpinAssignment) -> float:
    """Classical Ising energy of the assignment, offset included."""
    _require_same_labels(model.labels, x.values)
    total = model.offset
    for lab in model.labels:
        total += model.biases[lab] * x.values[lab]
    for (a, b), j in model.couplings.items():
        total += j * x.values[a] * x.values[b]
    return total


def qubo_energy(model: QuboModel, x: Mapping[Label, int]) -> float:
    """QUBO energy of a binary assignment (values in {0, 1}), offset included."""
    values = _normalize_values(x, (0, 1), "binary value")
    _require_same_labels(model.labels, values)
    total = model.offset
    for lab in model.labels:
        total += model.linear[lab] * values[lab]
    for (a, b), q in model.quadratic.items():
        total += q * values[a] * values[b]
    return total


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Exact change of variables x = (s + 1)/2.

    a*x     -> (a/2)*s + a/2
    b*x*y   -> (b/4)*s*t + (b/4)*s + (b/4)*t + b/4
    """
    h = {lab: q.linear[lab] / 2.0 for lab in q.labels}
    j: dict[Pair, float] = {}
    offset = q.offset + sum(q.linear.values()) / 2.0
    for (a, b), value in q.quadratic.items():
        j[(a, b)] = value / 4.0
        h[a] += value / 4.0
        h[b] += value / 4.0
        offset += value / 4.0
    return IsingModel(labels=q.labels, biases=h, couplings=j, offset=offset)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Exact change of variables s = 2x - 1.

    h*s     -> 2h*x - h
    J*s*t   -> 4J*x*y - 2J*x - 2J*y + J
    """
    linear = {lab: 2.0 * m.biases[lab] for lab in m.labels}
    quad: dict[Pair, float] = {}
    offset = m.offset - sum(m.biases.values())
    for (a, b), value in m.couplings.items():
        quad[(a, b)] = 4.0 * value
        linear[a] -= 2.0 * value
        linear[b] -= 2.0 * value
        offset += value
    return QuboModel(labels=m.labels, linear=linear, quadratic=quad, offset=offset)


def freeze(model: IsingModel, directive: FreezeDirective) -> IsingModel:
    """Fix the directive's variables and return the reduced model.

    Fixing spins at z maps the energy function exactly:
      - biases of active neighbours absorb J_ij * z_j,
      - biases of frozen variables contribute h_i * z_i to the offset,
      - couplings between two frozen variables contribute J_ij * z_i * z_j
        to the offset,
    so that for every assignment a of the surviving variables,
    energy(freeze(m, d), a) == energy(m, a combined with d) exactly.
    """
    frozen = directive.frozen
    unknown = [lab for lab in frozen if lab not in model.biases]
    if unknown:
        raise ValidationError(f"cannot freeze unknown labels {unknown[:5]!r}")

    active = tuple(lab for lab in model.labels if lab not in frozen)
    biases = {lab: model.biases[lab] for lab in active}
    couplings: dict[Pair, float] = {}
    offset = model.offset
    for lab, z in frozen.items():
        offset += model.biases[lab] * z

    for (a, b), j in model.couplings.items():
        a_frozen, b_frozen = a in frozen, b in frozen
        if a_frozen and b_frozen:
            offset += j * frozen[a] * frozen[b]
        elif a_frozen:
            biases[b] += j * frozen[a]
        elif b_frozen:
            biases[a] += j * frozen[b]
        else:
            couplings[(a, b)] = j
    return IsingModel(labels=active, biases=biases, couplings=couplings, offset=offset)


def reconstruct(
    active: SpinAssignment, history: Sequence[FreezeDirective]
) -> SpinAssignment:
    """Merge an active-variable assignment with all frozen values.

    The result covers the original label set when the history comes from a
    chain of freezes of that model; overlaps are rejected here, completeness
    is enforced when the result is evaluated against the original model.
    """
    merged = dict(active.values)
    for directive in history:
        for lab, value in directive.frozen.items():
            if lab in merged:
                raise ValidationError(f"label {lab!r} assigned twice during reconstruction")
            merged[lab] = value
    return SpinAssignment(values=merged)


# --- problem file round-trip ------------------------------------------------
#
# Schema: {"type": "ising"|"qubo", "labels": [...], "linear": {label: coeff},
#          "quadratic": [[label, label, coeff], ...], "offset": real}
# JSON object keys are always strings, so linear keys are written as
# str(label) and resolved back through the labels array on load.


def problem_to_dict(model: IsingModel | QuboModel) -> dict:
    if isinstance(model, IsingModel):
        kind, linear, quadratic = "ising", model.biases, model.couplings
    elif isinstance(model, QuboModel):
        kind, linear, quadratic = "qubo", model.linear, model.quadratic
    else:
        raise ValidationError(f"not a problem model: {type(model).__name__}")
    return {
        "type": kind,
        "labels": list(model.labels),
        "linear": {str(lab): linear[lab] for lab in model.labels},
        "quadratic": [[a, b, value] for (a, b), value in quadratic.items()],
        "offset": model.offset,
    }


def problem_from_dict(data: dict) -> IsingModel | QuboModel:
    try:
        kind = data["type"]
        raw_labels = data["labels"]
        raw_linear = data.get("linear", {})
        raw_quadratic = data.get("quadratic", [])
        offset = data.get("offset", 0.0)
    except (TypeError, KeyError) as exc:
        raise ProblemFormatError(f"problem object missing field {exc}") from exc
    labels = _normalize_labels(raw_labels)
    by_name = {str(lab): lab for lab in labels}
    try:
        linear = {by_name[name]: value for name, value in raw_linear.items()}
    except KeyError as exc:
        raise ProblemFormatError(f"linear term for unknown label {exc.args[0]!r}") from exc
    try:
        quadratic = [(a, b, value) for a, b, value in raw_quadratic]
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"quadratic rows must be [label, label, coeff]: {exc}") from exc
    if kind == "ising":
        return IsingModel(labels=labels, biases=linear, couplings=quadratic, offset=offset)
    if kind == "qubo":
        return QuboModel(labels=labels, linear=linear, quadratic=quadratic, offset=offset)
    raise ProblemFormatError(f"unknown problem type {kind!r}")


def save_problem(model: IsingModel | QuboModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_problem(path: str | os.PathLike) -> IsingModel | QuboModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(
                f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
    try:
        return problem_from_dict(data)
    except ValidationError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc
