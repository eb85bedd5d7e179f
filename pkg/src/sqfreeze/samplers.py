"""Samplers over Ising models and the SampleSet container they produce.

The sampler interface stands in for an annealer: it only has to return shot
statistics. Two implementations are provided, a simulated-annealing sampler
(the default; compiled kernel when available) and a deterministic "exact"
sampler that spreads the requested shots over the true ground-state manifold.
An exhaustive enumerator and the classical level spectrum live here too.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import (
    ProblemFormatError,
    SizeLimitError,
    ValidationError,
)
from .model import IsingModel, Label, SpinAssignment, energy

__all__ = [
    "SampleRecord",
    "SampleSet",
    "SamplerParams",
    "sample",
    "enumerate_exact",
    "classical_spectrum",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 25
_BLOCK = 1 << 16

SAMPLER_KINDS = ("exact", "simulated_annealing")


@dataclass(frozen=True)
class SamplerParams:
    """Configuration of a sampler call.

    Defaults mirror the experimental setup used throughout: 1000 shots and a
    geometric inverse-temperature ramp from 0.1 to 10 over 1000 sweeps.
    """

    shots: int = 1000
    seed: int = 0
    kind: str = "simulated_annealing"
    sa_sweeps: int = 1000
    sa_beta_range: tuple[float, float] = (0.1, 10.0)

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValidationError(f"shots must be >= 1, got {self.shots}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if self.kind not in SAMPLER_KINDS:
            raise ValidationError(f"kind must be one of {SAMPLER_KINDS}, got {self.kind!r}")
        if self.sa_sweeps < 1:
            raise ValidationError(f"sa_sweeps must be >= 1, got {self.sa_sweeps}")
        lo, hi = self.sa_beta_range
        if not (0 < lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError(
                f"sa_beta_range endpoints must be positive and increasing, got {self.sa_beta_range}"
            )
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "sa_beta_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class SampleRecord:
    assignment: SpinAssignment
    energy: float
    multiplicity: int


def _vector_energies(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    """Energies of each row of a (rows, n) spin matrix, offset included."""
    h, rows, cols, vals = model.to_arrays()
    s = spins.astype(np.float64)
    e = s @ h
    if vals.size:
        e = e + (s[:, rows] * s[:, cols]) @ vals
    return e + model.offset


class SampleSet:
    """Merged, energy-sorted shot statistics over a fixed label order.

    Rows with identical assignments are merged and their multiplicities
    summed; the surviving records are sorted by (energy, assignment) so two
    equal sample sets serialize identically. Backed by numpy arrays, exposed
    both as arrays (spins/energies/counts) and as SampleRecord objects.
    """

    def __init__(
        self,
        labels: Sequence[Label],
        spins: np.ndarray,
        energies: np.ndarray,
        counts: np.ndarray,
        merge: bool = True,
    ) -> None:
        self.labels: tuple[Label, ...] = tuple(labels)
        spins = np.ascontiguousarray(spins, dtype=np.int8)
        energies = np.asarray(energies, dtype=np.float64)
        counts = np.asarray(counts, dtype=np.int64)
        if spins.ndim != 2 or spins.shape[1] != len(self.labels):
            raise ValidationError("spin matrix shape does not match labels")
        if energies.shape != (spins.shape[0],) or counts.shape != (spins.shape[0],):
            raise ValidationError("energies/counts length does not match spin rows")
        if spins.size and not np.all(np.abs(spins) == 1):
            raise ValidationError("spins must be -1 or +1")
        if np.any(counts < 1):
            raise ValidationError("multiplicities must be positive")
        if energies.size and not np.all(np.isfinite(energies)):
            raise ValidationError("energies must be finite")

        if merge and spins.shape[0] > 1:
            uniq, inverse = np.unique(spins, axis=0, return_inverse=True)
            merged_counts = np.zeros(uniq.shape[0], dtype=np.int64)
            np.add.at(merged_counts, inverse, counts)
            merged_energies = np.empty(uniq.shape[0], dtype=np.float64)
            merged_energies[inverse] = energies
            spins, energies, counts = uniq, merged_energies, merged_counts
            # unique() already left rows in lexicographic order, so a stable
            # energy sort keeps equal-energy records lexicographically sorted
            order = np.argsort(energies, kind="stable")
            spins, energies, counts = spins[order], energies[order], counts[order]

        self.spins = spins
        self.energies = energies
        self.counts = counts
        self.total_shots = int(counts.sum()) if counts.size else 0
        self._positions = {lab: k for k, lab in enumerate(self.labels)}
        self._records: list[SampleRecord] | None = None

    # --- constructors ---------------------------------------------------

    @classmethod
    def from_spins(
        cls, model: IsingModel, spins: np.ndarray, counts: np.ndarray | None = None
    ) -> "SampleSet":
        spins = np.ascontiguousarray(spins, dtype=np.int8)
        if counts is None:
            counts = np.ones(spins.shape[0], dtype=np.int64)
        energies = _vector_energies(model, spins)
        out = cls(model.labels, spins, energies, counts)
        out._spot_check(model)
        return out

    @classmethod
    def empty_model(cls, model: IsingModel, shots: int) -> "SampleSet":
        """All shots of a zero-variable model: one empty record at the offset."""
        return cls(
            (),
            np.empty((1, 0), dtype=np.int8),
            np.array([model.offset]),
            np.array([shots]),
        )

    def _spot_check(self, model: IsingModel, limit: int = 32) -> None:
        # guards the vectorized energy path against the scalar definition
        for row in range(min(limit, self.spins.shape[0])):
            direct = energy(model, self.assignment(row))
            if abs(direct - self.energies[row]) > 1e-9:
                raise ValidationError(
                    f"sample energy inconsistent with model at record {row}: "
                    f"{self.energies[row]} vs {direct}"
                )

    # --- accessors -------------------------------------------------------

    def position(self, label: Label) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise ValidationError(f"unknown label {label!r}") from None

    def assignment(self, row: int) -> SpinAssignment:
        return SpinAssignment(
            values={lab: int(v) for lab, v in zip(self.labels, self.spins[row])}
        )

    @property
    def records(self) -> list[SampleRecord]:
        if self._records is None:
            self._records = [
                SampleRecord(self.assignment(r), float(self.energies[r]), int(self.counts[r]))
                for r in range(self.spins.shape[0])
            ]
        return self._records

    def lowest(self) -> SampleRecord:
        if not self.spins.shape[0]:
            raise ValidationError("sample set has no records")
        return self.records[0]

    def histogram(self) -> list[tuple[float, int]]:
        """Distinct energies with total shot counts, ascending."""
        uniq, inverse = np.unique(self.energies, return_inverse=True)
        counts = np.zeros(uniq.shape[0], dtype=np.int64)
        np.add.at(counts, inverse, self.counts)
        return [(float(e), int(c)) for e, c in zip(uniq, counts)]

    def __len__(self) -> int:
        return self.spins.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.total_shots == other.total_shots
            and np.array_equal(self.spins, other.spins)
            and np.array_equal(self.energies, other.energies)
            and np.array_equal(self.counts, other.counts)
        )

    # --- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "shots": self.total_shots,
            "records": [
                {
                    "assignment": [int(v) for v in self.spins[r]],
                    "energy": float(self.energies[r]),
                    "count": int(self.counts[r]),
                }
                for r in range(self.spins.shape[0])
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleSet":
        try:
            labels = data["labels"]
            shots = data["shots"]
            records = data["records"]
            spins = np.array([rec["assignment"] for rec in records], dtype=np.int8)
            energies = np.array([rec["energy"] for rec in records], dtype=np.float64)
            counts = np.array([rec["count"] for rec in records], dtype=np.int64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemFormatError(f"malformed sample set object: {exc}") from exc
        if not records:
            spins = np.empty((0, len(labels)), dtype=np.int8)
        out = cls(labels, spins, energies, counts)
        if out.total_shots != shots:
            raise ProblemFormatError(
                f"stored shot count {shots} != sum of multiplicities {out.total_shots}"
            )
        return out

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SampleSet":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ProblemFormatError(
                    f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from exc
        return cls.from_dict(data)

    def to_csv(self, path: str | os.PathLike) -> None:
        """One row per record: energy, count, then one column per label."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["energy", "count", *map(str, self.labels)])
            for r in range(self.spins.shape[0]):
                writer.writerow(
                    [repr(float(self.energies[r])), int(self.counts[r]), *map(int, self.spins[r])]
                )


# --- samplers -------------------------------------------------------------


def _csr_adjacency(
    n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric CSR over spin positions, neighbours sorted within each row."""
    src = np.concatenate([rows, cols])
    dst = np.concatenate([cols, rows])
    v = np.concatenate([vals, vals])
    order = np.lexsort((dst, src))
    src, dst, v = src[order], dst[order], v[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, dst.astype(np.int64), v.astype(np.float64)


def _beta_schedule(params: SamplerParams) -> np.ndarray:
    lo, hi = params.sa_beta_range
    return np.geomspace(lo, hi, params.sa_sweeps)


def _sample_sa(model: IsingModel, params: SamplerParams) -> SampleSet:
    h, rows, cols, vals = model.to_arrays()
    ptr, idx, val = _csr_adjacency(model.num_vars, rows, cols, vals)
    betas = _beta_schedule(params)
    spins = _kernels.run_shots(h, ptr, idx, val, betas, params.shots, params.seed)
    return SampleSet.from_spins(model, spins)


def _sample_exact(model: IsingModel, params: SamplerParams) -> SampleSet:
    # Ideal-annealer stand-in: the m shots are distributed round-robin over
    # the ground-state manifold in lexicographic order, so likeliness
    # statistics approach exact ground-state averages deterministically.
    full = enumerate_exact(model)
    ground = full.energies == full.energies[0]
    g_spins = full.spins[ground]
    g = g_spins.shape[0]
    base, extra = divmod(params.shots, g)
    counts = np.full(g, base, dtype=np.int64)
    counts[:extra] += 1
    keep = counts > 0
    return SampleSet(
        model.labels,
        g_spins[keep],
        np.full(int(keep.sum()), full.energies[0]),
        counts[keep],
    )


def sample(model: IsingModel, params: SamplerParams) -> SampleSet:
    """Draw params.shots samples from the model with the configured sampler.

    Deterministic for fixed (model, params). A zero-variable model yields
    params.shots copies of the empty assignment at the offset energy.
    """
    if model.num_vars == 0:
        return SampleSet.empty_model(model, params.shots)
    if params.kind == "exact":
        return _sample_exact(model, params)
    return _sample_sa(model, params)


# --- exhaustive enumeration -------------------------------------------------


def _check_enumerable(model: IsingModel) -> None:
    if model.num_vars > ENUMERATION_LIMIT:
        raise SizeLimitError(
            f"exhaustive enumeration is limited to {ENUMERATION_LIMIT} variables, "
            f"got {model.num_vars}"
        )


def _spin_block(start: int, stop: int, n: int) -> np.ndarray:
    """Rows start..stop of the canonical assignment table.

    Assignment index k holds the spins whose (0/1) bits are the binary digits
    of k, most significant bit first; bit 1 means spin +1. Index order is
    therefore lexicographic order over spin tuples with -1 < +1.
    """
    ks = np.arange(start, stop, dtype=np.int64)
    shifts = n - 1 - np.arange(n, dtype=np.int64)
    bits = (ks[:, None] >> shifts[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def enumerate_exact(model: IsingModel) -> SampleSet:
    """All 2^n assignments, one record each, sorted by (energy, assignment)."""
    _check_enumerable(model)
    n = model.num_vars
    total = 1 << n
    spins = np.empty((total, n), dtype=np.int8)
    energies = np.empty(total, dtype=np.float64)
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        block = _spin_block(start, stop, n)
        spins[start:stop] = block
        energies[start:stop] = _vector_energies(model, block)
    order = np.argsort(energies, kind="stable")  # ties stay in lex order
    return SampleSet(
        model.labels,
        spins[order],
        energies[order],
        np.ones(total, dtype=np.int64),
        merge=False,
    )


def classical_spectrum(model: IsingModel) -> list[tuple[float, int]]:
    """Distinct classical energies with degeneracies, strictly ascending."""
    _check_enumerable(model)
    n = model.num_vars
    total = 1 << n
    levels: dict[float, int] = {}
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        block_energies = _vector_energies(model, _spin_block(start, stop, n))
        uniq, counts = np.unique(block_energies, return_counts=True)
        for e, c in zip(uniq, counts):
            key = float(e)
            levels[key] = levels.get(key, 0) + int(c)
    return sorted(levels.items())
