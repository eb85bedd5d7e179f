"""Seeded generators for the two benchmark problem families.

Complete-graph random Ising instances (biases uniform on [-2, 2], couplings
uniform on [-1, 1]) and random not-all-equal 3-SAT instances encoded as Ising
models, with optional planting so the ground energy is known exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ProblemFormatError, ValidationError
from .model import (
    IsingModel,
    SpinAssignment,
    energy,
    problem_from_dict,
    problem_to_dict,
)

__all__ = [
    "Nae3SatInstance",
    "random_complete_ising",
    "random_nae3sat",
    "satisfaction_ratio",
    "save_nae3sat",
    "load_nae3sat",
]

Clause = tuple[tuple[int, int], tuple[int, int], tuple[int, int]]


def random_complete_ising(n: int, seed: int) -> IsingModel:
    """Complete-graph Ising instance on labels 0..n-1.

    h_i ~ U(-2, 2) drawn first in label order, then J_ij ~ U(-1, 1) in
    lexicographic pair order. Deterministic for a fixed seed.
    """
    if n < 1:
        raise ValidationError(f"need at least one variable, got {n}")
    rng = np.random.default_rng(seed)
    labels = tuple(range(n))
    biases = {i: float(b) for i, b in zip(labels, rng.uniform(-2.0, 2.0, n))}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    strengths = rng.uniform(-1.0, 1.0, len(pairs))
    couplings = {pair: float(v) for pair, v in zip(pairs, strengths)}
    return IsingModel(labels=labels, biases=biases, couplings=couplings)


def _clause_satisfied(clause: Clause, values: dict[int, int]) -> bool:
    # not-all-equal over the three literal values p_a * s_a
    lits = [pol * values[var] for var, pol in clause]
    return not (lits[0] == lits[1] == lits[2])


@dataclass(frozen=True)
class Nae3SatInstance:
    """A random NAE3SAT instance and its Ising encoding.

    Each clause over variables (i, j, k) with polarities (p_i, p_j, p_k)
    contributes +1 * p_a * p_b to the coupling of each of its three variable
    pairs. Summing the three pair products of the literal values gives -1
    when the literals are not all equal and +3 when they are, so the model
    energy is (number of clauses violated) * 3 - (number satisfied), bounded
    below by -num_clauses.
    """

    num_vars: int
    clauses: tuple[Clause, ...]
    planted: Optional[SpinAssignment]
    model: IsingModel
    num_clauses: int


def random_nae3sat(
    n: int, rho: float = 2.1, seed: int = 0, plant: bool = True
) -> Nae3SatInstance:
    """Random NAE3SAT with round(rho * n) clauses on labels 0..n-1.

    Clause variables are drawn uniformly without replacement and polarities
    uniformly; duplicate clauses are allowed and their couplings accumulate.
    With plant=True a hidden assignment is drawn first and each clause's
    polarities are redrawn until that assignment satisfies it, which pins the
    ground energy at exactly -num_clauses.
    """
    if n < 3:
        raise ValidationError(f"NAE3SAT needs at least 3 variables, got {n}")
    if not rho > 0:
        raise ValidationError(f"clause-to-variable ratio must be positive, got {rho}")
    n_cl = round(rho * n)
    if n_cl < 1:
        raise ValidationError(f"rho={rho} with n={n} yields no clauses")

    rng = np.random.default_rng(seed)
    hidden: Optional[dict[int, int]] = None
    if plant:
        hidden = {i: int(v) for i, v in enumerate(rng.integers(0, 2, n) * 2 - 1)}

    clauses: list[Clause] = []
    triples: list[tuple[int, int, float]] = []
    for _ in range(n_cl):
        variables = [int(v) for v in rng.choice(n, size=3, replace=False)]
        while True:
            pols = [int(p) for p in rng.integers(0, 2, 3) * 2 - 1]
            clause: Clause = tuple(zip(variables, pols))  # type: ignore[assignment]
            if hidden is None or _clause_satisfied(clause, hidden):
                break
        clauses.append(clause)
        (a, pa), (b, pb), (c, pc) = clause
        triples.append((a, b, float(pa * pb)))
        triples.append((b, c, float(pb * pc)))
        triples.append((a, c, float(pa * pc)))

    model = IsingModel(labels=tuple(range(n)), couplings=triples)
    planted = SpinAssignment(values=hidden) if hidden is not None else None
    if planted is not None:
        got = energy(model, planted)
        if got != -float(n_cl):
            raise ValidationError(
                f"planting failed: planted energy {got} != {-n_cl}"
            )
    return Nae3SatInstance(
        num_vars=n,
        clauses=tuple(clauses),
        planted=planted,
        model=model,
        num_clauses=n_cl,
    )


def satisfaction_ratio(e: float, n_cl: int) -> float:
    """Fraction of satisfied clauses implied by an energy: 1 - (E + N_cl)/(4 N_cl)."""
    if n_cl < 1:
        raise ValidationError(f"need at least one clause, got {n_cl}")
    return 1.0 - (e - (-float(n_cl))) / (4.0 * n_cl)


def instance_to_dict(inst: Nae3SatInstance) -> dict:
    data = problem_to_dict(inst.model)
    data["nae3sat"] = {
        "clauses": [[[var, pol] for var, pol in clause] for clause in inst.clauses],
        "planted": (
            [inst.planted.values[i] for i in range(inst.num_vars)]
            if inst.planted is not None
            else None
        ),
    }
    return data


def instance_from_dict(data: dict) -> Nae3SatInstance:
    model = problem_from_dict(data)
    if not isinstance(model, IsingModel):
        raise ProblemFormatError("NAE3SAT instance files must embed an ising model")
    try:
        side = data["nae3sat"]
        clauses = tuple(
            tuple((int(var), int(pol)) for var, pol in clause) for clause in side["clauses"]
        )
        raw_planted = side["planted"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"malformed NAE3SAT section: {exc}") from exc
    planted = None
    if raw_planted is not None:
        planted = SpinAssignment(values={i: int(v) for i, v in enumerate(raw_planted)})
    return Nae3SatInstance(
        num_vars=model.num_vars,
        clauses=clauses,  # type: ignore[arg-type]
        planted=planted,
        model=model,
        num_clauses=len(clauses),
    )


def save_nae3sat(inst: Nae3SatInstance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_nae3sat(path: str | os.PathLike) -> Nae3SatInstance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(
                f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
    return instance_from_dict(data)
