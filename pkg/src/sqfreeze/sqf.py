"""The statistical freezing loop and its selection strategies.

Each iteration samples the current model, computes per-variable likeliness
(the empirical magnetization z = P(+1) - P(-1)), picks freeze candidates
according to the configured strategy, verifies each candidate's freezing
merit (the estimated energy change of fixing it, using conditional
likeliness of its neighbours), freezes the survivors simultaneously, and
repeats on the reduced model until nothing freezes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import EmptyConditionError, ValidationError
from .model import (
    FreezeDirective,
    IsingModel,
    Label,
    SpinAssignment,
    freeze,
    reconstruct,
)
from .samplers import SampleSet, SamplerParams, sample

logger = logging.getLogger(__name__)

__all__ = [
    "STRATEGIES",
    "SqfConfig",
    "FreezeRecord",
    "SqfIteration",
    "SqfRun",
    "likeliness",
    "likeliness_vector",
    "conditional_likeliness",
    "freezing_merit",
    "effective_threshold",
    "select_candidates",
    "sqf_step",
    "run_sqf",
    "run_report",
    "graph_evolution",
]

STRATEGIES = ("vanilla", "progressive_threshold", "first_m", "one_each_time")

Sampler = Callable[[IsingModel, SamplerParams], SampleSet]


@dataclass(frozen=True)
class SqfConfig:
    """Knobs of the freezing loop.

    threshold is the minimum |z| for a variable to become a candidate
    (strict inequality). progressive_threshold raises it by
    threshold_increment after every increment_every iterations; first_m keeps
    at most m_limit candidates per iteration; one_each_time always freezes
    exactly the single largest-|z| variable, skipping both the threshold and
    the merit gate. shots overrides the sampler's shot count for the loop.
    """

    threshold: float = 0.6
    strategy: str = "vanilla"
    threshold_increment: float = 0.05
    increment_every: int = 3
    m_limit: int = 5
    shots: int = 1000
    max_iterations: int = 64
    sampler: SamplerParams = field(default_factory=SamplerParams)

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )
        if not self.threshold_increment > 0:
            raise ValidationError("threshold_increment must be positive")
        if self.increment_every < 1:
            raise ValidationError("increment_every must be >= 1")
        if self.m_limit < 1:
            raise ValidationError("m_limit must be >= 1")
        if self.shots < 1:
            raise ValidationError("shots must be >= 1")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


@dataclass(frozen=True)
class FreezeRecord:
    """One frozen variable: its value, the statistics that justified it."""

    label: Label
    frozen_value: int
    likeliness: float
    merit: float
    iteration: int


@dataclass(frozen=True)
class SqfIteration:
    model_before: IsingModel
    sample_set: SampleSet
    freezes: tuple[FreezeRecord, ...]
    effective_threshold: float


@dataclass(frozen=True)
class SqfRun:
    iterations: tuple[SqfIteration, ...]
    final_model: IsingModel
    best_assignment: SpinAssignment
    best_energy: float
    terminated_reason: str
    directives: tuple[FreezeDirective, ...]


# --- sample statistics ------------------------------------------------------


def likeliness(s: SampleSet, i: Label) -> float:
    """Empirical magnetization of variable i: P(+1) - P(-1), in [-1, 1]."""
    if s.total_shots < 1:
        raise ValidationError("sample set has no shots")
    col = s.spins[:, s.position(i)].astype(np.int64)
    return float((col * s.counts).sum()) / s.total_shots


def likeliness_vector(s: SampleSet) -> np.ndarray:
    """Likeliness of every label at once, in label order."""
    if s.total_shots < 1:
        raise ValidationError("sample set has no shots")
    return (s.counts.astype(np.float64) @ s.spins.astype(np.float64)) / s.total_shots


def conditional_likeliness(s: SampleSet, j: Label, i: Label, zbar: int) -> float:
    """Likeliness of j over only the shots where variable i equals zbar."""
    if i == j:
        raise ValidationError("conditional likeliness needs two distinct labels")
    if zbar not in (-1, 1):
        raise ValidationError(f"zbar must be -1 or +1, got {zbar!r}")
    pi, pj = s.position(i), s.position(j)
    mask = s.spins[:, pi] == zbar
    subset = s.counts[mask]
    m_sub = int(subset.sum())
    if m_sub == 0:
        raise EmptyConditionError(
            f"no shots have {i!r} == {zbar:+d}; conditional likeliness undefined"
        )
    col = s.spins[mask, pj].astype(np.int64)
    return float((col * subset).sum()) / m_sub


def freezing_merit(model: IsingModel, s: SampleSet, i: Label, zbar: int) -> float:
    """Estimated energy change of fixing i at zbar.

    h_i * zbar plus, for every coupled neighbour j, J_ij * zbar times the
    conditional likeliness of j given i == zbar. Negative merit means the fix
    is expected to lower the energy.
    """
    if i not in model.biases:
        raise ValidationError(f"label {i!r} not active in model")
    total = model.biases[i] * zbar
    for (a, b), j_val in model.couplings.items():
        if j_val == 0.0:
            continue
        if a == i:
            other = b
        elif b == i:
            other = a
        else:
            continue
        total += j_val * zbar * conditional_likeliness(s, other, i, zbar)
    return total


def _merit_with_fallback(model: IsingModel, s: SampleSet, i: Label, zbar: int) -> float:
    # the conditioning subset is nonempty whenever zbar = sign(z) and the
    # statistics came from real shots; guard the degenerate corner anyway
    try:
        return freezing_merit(model, s, i, zbar)
    except EmptyConditionError:
        logger.warning(
            "empty conditioning subset for %r == %+d; falling back to "
            "unconditional likeliness",
            i,
            zbar,
        )
        total = model.biases[i] * zbar
        for (a, b), j_val in model.couplings.items():
            if j_val == 0.0 or i not in (a, b):
                continue
            other = b if a == i else a
            total += j_val * zbar * likeliness(s, other)
        return total


# --- candidate selection ------------------------------------------------------


def effective_threshold(cfg: SqfConfig, iteration: int) -> float:
    """Selection threshold in force at a given (0-based) iteration."""
    if iteration < 0:
        raise ValidationError(f"iteration must be >= 0, got {iteration}")
    if cfg.strategy == "progressive_threshold":
        return cfg.threshold + cfg.threshold_increment * (iteration // cfg.increment_every)
    return cfg.threshold


def select_candidates(
    s: SampleSet, cfg: SqfConfig, iteration: int
) -> list[tuple[Label, int]]:
    """Freeze candidates with their target values, in label order.

    vanilla/progressive: every label with |z| strictly above the effective
    threshold. first_m: the m_limit largest |z| among those above the base
    threshold. one_each_time: the single largest |z|, no threshold. Ties are
    broken by label order; the target value is +1 when z > 0 else -1.
    """
    z = likeliness_vector(s)
    if cfg.strategy == "one_each_time":
        if z.size == 0:
            return []
        best = int(np.argmax(np.abs(z)))  # argmax returns the first, i.e. label order
        return [(s.labels[best], 1 if z[best] > 0 else -1)]
    eff = effective_threshold(cfg, iteration)
    over = [k for k in range(z.size) if abs(z[k]) > eff]
    if cfg.strategy == "first_m":
        over.sort(key=lambda k: (-abs(z[k]), k))
        over = sorted(over[: cfg.m_limit])
    return [(s.labels[k], 1 if z[k] > 0 else -1) for k in over]


# --- the loop ----------------------------------------------------------------


def _iteration_seed(root_seed: int, iteration: int) -> int:
    # independent per-iteration streams; shot k within an iteration then uses
    # SeedSequence((iteration_seed, k)) inside the kernels
    return int(np.random.SeedSequence((root_seed, iteration)).generate_state(1, np.uint64)[0])


def sqf_step(
    model: IsingModel,
    cfg: SqfConfig,
    iteration: int,
    sampler: Optional[Sampler] = None,
) -> tuple[IsingModel, SampleSet, list[FreezeRecord]]:
    """One iteration: sample, select, verify merit, freeze simultaneously.

    All candidates are judged against the same sample set, then frozen
    together. Strategies other than one_each_time drop candidates whose
    merit is not negative; one_each_time records the merit without gating.
    """
    if model.num_vars < 1:
        raise ValidationError("sqf_step needs at least one active variable")
    sampler_fn = sample if sampler is None else sampler
    params = replace(
        cfg.sampler, shots=cfg.shots, seed=_iteration_seed(cfg.sampler.seed, iteration)
    )
    sset = sampler_fn(model, params)
    records: list[FreezeRecord] = []
    directive: dict[Label, int] = {}
    for lab, zbar in select_candidates(sset, cfg, iteration):
        merit = _merit_with_fallback(model, sset, lab, zbar)
        if cfg.strategy != "one_each_time" and not merit < 0.0:
            continue
        records.append(
            FreezeRecord(
                label=lab,
                frozen_value=zbar,
                likeliness=likeliness(sset, lab),
                merit=merit,
                iteration=iteration,
            )
        )
        directive[lab] = zbar
    if directive:
        reduced = freeze(model, FreezeDirective(frozen=directive))
    else:
        reduced = model
    return reduced, sset, records


def run_sqf(
    model: IsingModel, cfg: SqfConfig, sampler: Optional[Sampler] = None
) -> SqfRun:
    """Iterate sqf_step until no variable freezes, the model empties, or the
    iteration cap is hit. Tracks the best full (reconstructed) assignment
    seen across all iterations, including the first.
    """
    iterations: list[SqfIteration] = []
    directives: list[FreezeDirective] = []
    best_energy = math.inf
    best_assignment: Optional[SpinAssignment] = None
    current = model
    t = 0
    while True:
        if current.num_vars == 0:
            reason = "fully_frozen"
            break
        if t >= cfg.max_iterations:
            reason = "max_iterations"
            break
        reduced, sset, records = sqf_step(current, cfg, t, sampler)
        iterations.append(
            SqfIteration(
                model_before=current,
                sample_set=sset,
                freezes=tuple(records),
                effective_threshold=effective_threshold(cfg, t),
            )
        )
        # reduced-model sample energies carry the accumulated offsets, so the
        # lowest one is already the full-model energy of its reconstruction
        lowest = float(sset.energies[0])
        if lowest < best_energy:
            best_energy = lowest
            best_assignment = reconstruct(sset.assignment(0), directives)
        if not records:
            reason = "no_freeze"
            break
        directives.append(FreezeDirective(frozen={r.label: r.frozen_value for r in records}))
        current = reduced
        t += 1

    if best_assignment is None:
        # zero-variable input: nothing was ever sampled
        best_assignment = SpinAssignment(values={})
        best_energy = model.offset
    return SqfRun(
        iterations=tuple(iterations),
        final_model=current,
        best_assignment=best_assignment,
        best_energy=best_energy,
        terminated_reason=reason,
        directives=tuple(directives),
    )


# --- reporting ----------------------------------------------------------------


def run_report(run: SqfRun, cfg: Optional[SqfConfig] = None) -> dict:
    """Plot-ready summary: per-iteration statistics plus the final result."""
    original = (
        run.iterations[0].model_before if run.iterations else run.final_model
    )
    iters = []
    best_so_far = math.inf
    for it in run.iterations:
        best_so_far = min(best_so_far, float(it.sample_set.energies[0]))
        iters.append(
            {
                "active_count": it.model_before.num_vars,
                "effective_threshold": it.effective_threshold,
                "frozen": [
                    {
                        "label": r.label,
                        "value": r.frozen_value,
                        "z": r.likeliness,
                        "merit": r.merit,
                    }
                    for r in it.freezes
                ],
                "best_energy_so_far": best_so_far,
                "histogram": [[e, c] for e, c in it.sample_set.histogram()],
            }
        )
    out = {
        "iterations": iters,
        "best_energy": run.best_energy,
        "best_assignment": [run.best_assignment.values[lab] for lab in original.labels],
        "assignment_labels": list(original.labels),
        "terminated_reason": run.terminated_reason,
        "frozen_total": sum(len(it.freezes) for it in run.iterations),
    }
    if cfg is not None:
        out["config"] = {
            "threshold": cfg.threshold,
            "strategy": cfg.strategy,
            "threshold_increment": cfg.threshold_increment,
            "increment_every": cfg.increment_every,
            "m_limit": cfg.m_limit,
            "shots": cfg.shots,
            "max_iterations": cfg.max_iterations,
            "sampler": {
                "kind": cfg.sampler.kind,
                "seed": cfg.sampler.seed,
                "sa_sweeps": cfg.sampler.sa_sweeps,
                "sa_beta_range": list(cfg.sampler.sa_beta_range),
            },
        }
    return out


def graph_evolution(run: SqfRun) -> dict:
    """Per-iteration variable states and surviving edges, for plotting.

    After each iteration every original variable is either "active",
    "frozen:+1", or "frozen:-1"; edges are the nonzero couplings still
    present in the reduced model.
    """
    original = run.iterations[0].model_before if run.iterations else run.final_model
    frozen_so_far: dict[Label, int] = {}
    iters = []
    for t, it in enumerate(run.iterations):
        for rec in it.freezes:
            frozen_so_far[rec.label] = rec.frozen_value
        model_after = (
            run.iterations[t + 1].model_before
            if t + 1 < len(run.iterations)
            else run.final_model
        )
        states = {
            str(lab): (
                "active" if lab not in frozen_so_far else f"frozen:{frozen_so_far[lab]:+d}"
            )
            for lab in original.labels
        }
        edges = [[a, b] for (a, b), v in model_after.couplings.items() if v != 0.0]
        iters.append({"iteration": t, "states": states, "edges": edges})
    return {"labels": list(original.labels), "iterations": iters}
