"""Small-system anneal spectra: H(s) = A(s) * (driver) + B(s) * (problem).

Builds the interpolating Hamiltonian as a dense real symmetric matrix on the
2^n classical basis, sweeps the anneal fraction s, extracts the lowest
eigenvalues and the minimum spectral gap, and runs the gap-widening
experiment (freeze the variable that separates the two lowest classical
assignments, compare minimum gaps before and after).

The driver is the uniform transverse term -sum_i sigma_x^(i); the problem
part is the classical model's diagonal. The model offset is excluded from
the matrix: it shifts every eigenvalue equally and cancels in every gap, and
the endpoint tests account for it explicitly.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import ProblemFormatError, SizeLimitError, SqfreezeError, ValidationError
from .generators import random_complete_ising
from .model import FreezeDirective, IsingModel, Label, freeze
from .samplers import _check_enumerable, _spin_block, _vector_energies

__all__ = [
    "DENSE_LIMIT",
    "AnnealSchedule",
    "SpectrumSweep",
    "GapReport",
    "GapWideningRow",
    "linear_schedule",
    "schedule_from_csv",
    "schedule_to_csv",
    "build_hamiltonian",
    "sweep_spectrum",
    "min_gap",
    "discriminating_qubit",
    "gap_widening_experiment",
    "sweep_to_csv",
]

DENSE_LIMIT = 14
_BLOCK = 1 << 16


@dataclass(frozen=True)
class AnnealSchedule:
    """Tabulated (s, A, B) anneal schedule in GHz, linearly interpolated.

    s must increase strictly from 0 to 1; A must be non-increasing and end
    near zero, B non-decreasing and start near zero ("near zero" meaning at
    most 2% of the respective peak, which admits published hardware
    schedules whose endpoints are small but not exactly zero).
    """

    points: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(s), float(a), float(b)) for s, a, b in self.points)
        if len(pts) < 2:
            raise ValidationError("schedule needs at least 2 points")
        ss = np.array([p[0] for p in pts])
        aa = np.array([p[1] for p in pts])
        bb = np.array([p[2] for p in pts])
        if not (np.all(np.isfinite(ss)) and np.all(np.isfinite(aa)) and np.all(np.isfinite(bb))):
            raise ValidationError("schedule values must be finite")
        if np.any(aa < 0) or np.any(bb < 0):
            raise ValidationError("schedule energies must be non-negative")
        if abs(ss[0]) > 1e-9 or abs(ss[-1] - 1.0) > 1e-9:
            raise ValidationError("schedule must span s = 0 to s = 1")
        if np.any(np.diff(ss) <= 0):
            raise ValidationError("schedule s values must be strictly increasing")
        if np.any(np.diff(aa) > 1e-12):
            raise ValidationError("A(s) must be non-increasing")
        if np.any(np.diff(bb) < -1e-12):
            raise ValidationError("B(s) must be non-decreasing")
        if aa[-1] > 0.02 * aa.max() + 1e-12:
            raise ValidationError("A(1) must be approximately zero")
        if bb[0] > 0.02 * bb.max() + 1e-12:
            raise ValidationError("B(0) must be approximately zero")
        object.__setattr__(self, "points", pts)

    def a(self, s: float) -> float:
        ss = [p[0] for p in self.points]
        return float(np.interp(s, ss, [p[1] for p in self.points]))

    def b(self, s: float) -> float:
        ss = [p[0] for p in self.points]
        return float(np.interp(s, ss, [p[2] for p in self.points]))


def linear_schedule(e_scale: float = 5.0) -> AnnealSchedule:
    """Default schedule: A(s) = e_scale * (1 - s), B(s) = e_scale * s."""
    if not e_scale > 0:
        raise ValidationError(f"e_scale must be positive, got {e_scale}")
    return AnnealSchedule(points=((0.0, e_scale, 0.0), (1.0, 0.0, e_scale)))


def schedule_from_csv(path: str | os.PathLike) -> AnnealSchedule:
    """Load a schedule from CSV columns (s, A_GHz, B_GHz); header rows allowed."""
    rows: list[tuple[float, float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError) as exc:
                if not rows:
                    continue  # leading header line(s)
                raise ProblemFormatError(
                    f"{path}: line {lineno}: expected 's,A_GHz,B_GHz' numbers: {exc}"
                ) from exc
    if len(rows) < 2:
        raise ProblemFormatError(f"{path}: schedule needs at least 2 numeric rows")
    return AnnealSchedule(points=tuple(rows))


def schedule_to_csv(sched: AnnealSchedule, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "A_GHz", "B_GHz"])
        for s, a, b in sched.points:
            writer.writerow([repr(s), repr(a), repr(b)])


@dataclass(frozen=True)
class SpectrumSweep:
    """Lowest k instantaneous eigenvalues per anneal fraction."""

    s_grid: tuple[float, ...]
    levels: np.ndarray  # (len(s_grid), k), ascending within each row
    k: int


@dataclass(frozen=True)
class GapReport:
    min_gap: float
    s_at_min: float
    gap_curve: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class GapWideningRow:
    seed: int
    gap_before: float
    gap_after: float
    ratio: float
    frozen_label: Label
    frozen_value: int


def _check_dense(model: IsingModel) -> None:
    if model.num_vars > DENSE_LIMIT:
        raise SizeLimitError(
            f"dense spectra are limited to {DENSE_LIMIT} variables, got {model.num_vars}"
        )


def _classical_diagonal(model: IsingModel) -> np.ndarray:
    """Classical energies of all 2^n assignments in index order, offset excluded."""
    bare = IsingModel(
        labels=model.labels, biases=model.biases, couplings=model.couplings, offset=0.0
    )
    n = model.num_vars
    return _vector_energies(bare, _spin_block(0, 1 << n, n))


def build_hamiltonian(model: IsingModel, sched: AnnealSchedule, s: float) -> np.ndarray:
    """Dense symmetric H(s) on the 2^n classical basis, offset excluded.

    Diagonal: B(s) times the classical energies in canonical assignment
    order. Off-diagonal: -A(s) between assignments differing in one spin.
    """
    _check_dense(model)
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"anneal fraction must be in [0, 1], got {s}")
    n = model.num_vars
    dim = 1 << n
    a, b = sched.a(s), sched.b(s)
    hmat = np.zeros((dim, dim), dtype=np.float64)
    ks = np.arange(dim)
    hmat[ks, ks] = b * _classical_diagonal(model)
    for i in range(n):
        mask = 1 << (n - 1 - i)
        hmat[ks, ks ^ mask] += -a
    return hmat


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        try:
            threads = int(os.environ.get("SQF_THREADS", "1"))
        except ValueError:
            threads = 1
    return max(1, threads)


def sweep_spectrum(
    model: IsingModel,
    sched: AnnealSchedule,
    s_grid: Optional[Sequence[float]] = None,
    k: int = 2,
    threads: Optional[int] = None,
) -> SpectrumSweep:
    """Lowest k eigenvalues of H(s) over the grid (default: 201 uniform points).

    Grid points are independent; SQF_THREADS (or the threads argument) allows
    them to run in parallel, with results always assembled in grid order.
    """
    _check_dense(model)
    grid = np.linspace(0.0, 1.0, 201) if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 1:
        raise ValidationError("s_grid must be a non-empty 1-d sequence")
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise ValidationError("s_grid values must lie in [0, 1]")
    dim = 1 << model.num_vars
    if not 1 <= k <= dim:
        raise ValidationError(f"k must be in [1, {dim}], got {k}")

    def levels_at(s: float) -> np.ndarray:
        return scipy.linalg.eigvalsh(build_hamiltonian(model, sched, float(s)))[:k]

    workers = _resolve_threads(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(levels_at, grid))
    else:
        rows = [levels_at(s) for s in grid]
    return SpectrumSweep(s_grid=tuple(float(s) for s in grid), levels=np.array(rows), k=k)


def min_gap(sweep: SpectrumSweep) -> GapReport:
    """Minimum of E_1(s) - E_0(s) over the sweep grid, with its location."""
    if sweep.k < 2:
        raise ValidationError("gap analysis needs at least the two lowest levels")
    gaps = sweep.levels[:, 1] - sweep.levels[:, 0]
    at = int(np.argmin(gaps))
    return GapReport(
        min_gap=float(gaps[at]),
        s_at_min=float(sweep.s_grid[at]),
        gap_curve=tuple((float(s), float(g)) for s, g in zip(sweep.s_grid, gaps)),
    )


def discriminating_qubit(model: IsingModel) -> tuple[Label, int]:
    """The first variable whose value separates the two lowest assignments.

    Compares the lexicographically smallest minimum-energy assignment with
    the lexicographically smallest assignment at the next distinct energy,
    and returns the first differing label together with the ground value.
    """
    _check_enumerable(model)
    n = model.num_vars
    if n < 1:
        raise ValidationError("model has no variables")
    total = 1 << n
    e0 = np.inf
    i0 = -1
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        be = _vector_energies(model, _spin_block(start, stop, n))
        j = int(np.argmin(be))
        if be[j] < e0:
            e0, i0 = float(be[j]), start + j
    e1 = np.inf
    i1 = -1
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        be = _vector_energies(model, _spin_block(start, stop, n))
        above = np.nonzero(be > e0)[0]
        if above.size:
            j = int(above[np.argmin(be[above])])
            if be[j] < e1:
                e1, i1 = float(be[j]), start + j
    if i1 < 0:
        raise ValidationError(
            "the classical spectrum has a single level; no variable separates"
            " the two lowest assignments"
        )
    ground = _spin_block(i0, i0 + 1, n)[0]
    excited = _spin_block(i1, i1 + 1, n)[0]
    for pos in range(n):
        if ground[pos] != excited[pos]:
            return model.labels[pos], int(ground[pos])
    raise SqfreezeError("internal error: distinct assignments do not differ")


def gap_widening_experiment(
    n: int,
    seeds: Sequence[int],
    schedule: Optional[AnnealSchedule] = None,
    s_grid: Optional[Sequence[float]] = None,
    threads: Optional[int] = None,
) -> list[GapWideningRow]:
    """Per seed: generate a complete-graph instance, measure the minimum gap,
    freeze the discriminating variable at its ground value, re-measure under
    the same schedule, and report both gaps and their ratio.
    """
    if n < 2:
        raise ValidationError("gap widening needs at least 2 variables")
    sched = linear_schedule() if schedule is None else schedule
    rows = []
    for seed in seeds:
        model = random_complete_ising(n, seed)
        before = min_gap(sweep_spectrum(model, sched, s_grid, k=2, threads=threads))
        lab, value = discriminating_qubit(model)
        reduced = freeze(model, FreezeDirective(frozen={lab: value}))
        after = min_gap(sweep_spectrum(reduced, sched, s_grid, k=2, threads=threads))
        rows.append(
            GapWideningRow(
                seed=seed,
                gap_before=before.min_gap,
                gap_after=after.min_gap,
                ratio=after.min_gap / before.min_gap,
                frozen_label=lab,
                frozen_value=value,
            )
        )
    return rows


def sweep_to_csv(sweep: SpectrumSweep, path: str | os.PathLike) -> None:
    """Columns s, E_0 .. E_{k-1}; one row per grid point."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", *[f"E_{j}" for j in range(sweep.k)]])
        for s, row in zip(sweep.s_grid, sweep.levels):
            writer.writerow([repr(float(s)), *[repr(float(e)) for e in row]])


def gap_report_to_dict(report: GapReport) -> dict:
    return {"min_gap": report.min_gap, "s_at_min": report.s_at_min}
