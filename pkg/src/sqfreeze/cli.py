"""Command-line front end: seeded, file-based, reproducible experiments.

Subcommands: generate, solve, sqf, spectrum, convert. Every command writes a
manifest next to its outputs holding the fully resolved argument vector, the
tool version, and a timestamp; re-running a manifest (rerun_manifest) writes
byte-identical problem/sample/report files. All randomness comes from --seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import SqfreezeError, ValidationError
from .generators import (
    instance_to_dict,
    random_complete_ising,
    random_nae3sat,
)
from .model import (
    FreezeDirective,
    IsingModel,
    QuboModel,
    freeze,
    ising_to_qubo,
    load_problem,
    qubo_to_ising,
    save_problem,
)
from .samplers import SamplerParams, sample
from .spectrum import (
    discriminating_qubit,
    gap_report_to_dict,
    linear_schedule,
    min_gap,
    schedule_from_csv,
    sweep_spectrum,
    sweep_to_csv,
)
from .sqf import SqfConfig, graph_evolution, run_report, run_sqf

__all__ = ["main", "rerun_manifest"]

_STRATEGY_FLAGS = {
    "vanilla": "vanilla",
    "progressive": "progressive_threshold",
    "first-m": "first_m",
    "one-each-time": "one_each_time",
}


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _write_json(data: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _write_histogram(histogram: list[tuple[float, int]], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["energy", "count"])
        for e, c in histogram:
            writer.writerow([repr(float(e)), int(c)])


def _as_ising(model) -> IsingModel:
    # sampling and spectra run on the spin form; QUBO inputs convert exactly
    return qubo_to_ising(model) if isinstance(model, QuboModel) else model


def _stem(problem_path: str) -> str:
    return Path(problem_path).stem


def _sampler_params(args: argparse.Namespace) -> SamplerParams:
    return SamplerParams(
        shots=args.shots,
        seed=args.seed,
        kind="exact" if getattr(args, "sampler", "sa") == "exact" else "simulated_annealing",
        sa_sweeps=args.sweeps,
        sa_beta_range=(args.beta_min, args.beta_max),
    )


# --- command handlers -------------------------------------------------------


def _cmd_generate(args: argparse.Namespace) -> tuple[list[str], list[str]]:
    out_dir = Path(args.out_dir)
    if args.kind == "ising":
        model = random_complete_ising(args.n, args.seed)
        name = args.out or f"ising_n{args.n}_seed{args.seed}.json"
        save_problem(model, out_dir / name)
    else:
        inst = random_nae3sat(args.n, args.rho, args.seed, args.plant)
        name = args.out or f"nae3sat_n{args.n}_seed{args.seed}.json"
        _write_json(instance_to_dict(inst), out_dir / name)
    return [], [name]


def _cmd_solve(args: argparse.Namespace) -> tuple[list[str], list[str]]:
    out_dir = Path(args.out_dir)
    model = _as_ising(load_problem(args.problem))
    params = _sampler_params(args)
    sset = sample(model, params)
    stem = _stem(args.problem)
    outputs = []
    if args.format == "csv":
        samples_name = f"{stem}.samples.csv"
        sset.to_csv(out_dir / samples_name)
    else:
        samples_name = f"{stem}.samples.json"
        sset.save(out_dir / samples_name)
    hist_name = f"{stem}.hist.csv"
    _write_histogram(sset.histogram(), out_dir / hist_name)
    outputs += [samples_name, hist_name]
    return [args.problem], outputs


def _cmd_sqf(args: argparse.Namespace) -> tuple[list[str], list[str]]:
    out_dir = Path(args.out_dir)
    model = _as_ising(load_problem(args.problem))
    cfg = SqfConfig(
        threshold=args.threshold,
        strategy=_STRATEGY_FLAGS[args.strategy],
        threshold_increment=args.increment,
        increment_every=args.every,
        m_limit=args.m_limit,
        shots=args.shots,
        max_iterations=args.max_iterations,
        sampler=_sampler_params(args),
    )
    run = run_sqf(model, cfg)
    stem = _stem(args.problem)
    report_name = f"{stem}.sqf.json"
    _write_json(run_report(run, cfg), out_dir / report_name)
    graph_name = f"{stem}.graph.json"
    _write_json(graph_evolution(run), out_dir / graph_name)
    outputs = [report_name, graph_name]
    for t, it in enumerate(run.iterations):
        hist_name = f"{stem}.sqf.iter{t:03d}.hist.csv"
        _write_histogram(it.sample_set.histogram(), out_dir / hist_name)
        outputs.append(hist_name)
    return [args.problem], outputs


def _cmd_spectrum(args: argparse.Namespace) -> tuple[list[str], list[str]]:
    out_dir = Path(args.out_dir)
    model = _as_ising(load_problem(args.problem))
    sched = schedule_from_csv(args.schedule) if args.schedule else linear_schedule(args.e_scale)
    if args.grid < 2:
        raise ValidationError(f"--grid must be at least 2 points, got {args.grid}")
    grid = np.linspace(0.0, 1.0, args.grid)
    stem = _stem(args.problem)
    inputs = [args.problem] + ([args.schedule] if args.schedule else [])

    sweep = sweep_spectrum(model, sched, grid, k=args.k)
    sweep_name = f"{stem}.sweep.csv"
    sweep_to_csv(sweep, out_dir / sweep_name)
    gap_name = f"{stem}.gap.json"
    _write_json(gap_report_to_dict(min_gap(sweep)), out_dir / gap_name)
    outputs = [sweep_name, gap_name]

    if args.freeze_discriminating:
        label, value = discriminating_qubit(model)
        reduced = freeze(model, FreezeDirective(frozen={label: value}))
        frozen_sweep = sweep_spectrum(reduced, sched, grid, k=args.k)
        frozen_sweep_name = f"{stem}.frozen.sweep.csv"
        sweep_to_csv(frozen_sweep, out_dir / frozen_sweep_name)
        frozen_gap = gap_report_to_dict(min_gap(frozen_sweep))
        frozen_gap["frozen_label"] = label
        frozen_gap["frozen_value"] = value
        frozen_gap_name = f"{stem}.frozen.gap.json"
        _write_json(frozen_gap, out_dir / frozen_gap_name)
        outputs += [frozen_sweep_name, frozen_gap_name]
    return inputs, outputs


def _cmd_convert(args: argparse.Namespace) -> tuple[list[str], list[str]]:
    out_dir = Path(args.out_dir)
    model = load_problem(args.problem)
    if args.to == "ising":
        if isinstance(model, IsingModel):
            raise ValidationError("problem is already in ising form")
        converted = qubo_to_ising(model)
    else:
        if isinstance(model, QuboModel):
            raise ValidationError("problem is already in qubo form")
        converted = ising_to_qubo(model)
    name = f"{_stem(args.problem)}.{args.to}.json"
    save_problem(converted, out_dir / name)
    return [args.problem], [name]


_HANDLERS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sqf": _cmd_sqf,
    "spectrum": _cmd_spectrum,
    "convert": _cmd_convert,
}


# --- argument plumbing --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root RNG seed")
    common.add_argument("--out-dir", default=".", help="directory for all outputs")
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", help="sample-set output format"
    )

    sa_flags = argparse.ArgumentParser(add_help=False)
    sa_flags.add_argument("--shots", type=int, default=1000)
    sa_flags.add_argument("--sweeps", type=int, default=1000)
    sa_flags.add_argument("--beta-min", type=float, default=0.1)
    sa_flags.add_argument("--beta-max", type=float, default=10.0)

    parser = argparse.ArgumentParser(
        prog="sqfreeze",
        description="Statistics-driven variable freezing for Ising/QUBO problems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", parents=[common], help="write a problem file")
    p_gen.add_argument("kind", choices=("ising", "nae3sat"))
    p_gen.add_argument("--n", type=int, required=True, help="number of variables")
    p_gen.add_argument("--rho", type=float, default=2.1, help="clause-to-variable ratio")
    p_gen.add_argument(
        "--plant",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="plant a known optimum (nae3sat only)",
    )
    p_gen.add_argument("--out", default=None, help="output filename (default derived)")

    p_solve = sub.add_parser(
        "solve", parents=[common, sa_flags], help="sample a problem once"
    )
    p_solve.add_argument("problem")
    p_solve.add_argument("--sampler", choices=("sa", "exact"), default="sa")

    p_sqf = sub.add_parser(
        "sqf", parents=[common, sa_flags], help="run the freezing loop"
    )
    p_sqf.add_argument("problem")
    p_sqf.add_argument(
        "--strategy", choices=tuple(_STRATEGY_FLAGS), default="vanilla"
    )
    p_sqf.add_argument("--threshold", type=float, default=0.6)
    p_sqf.add_argument("--increment", type=float, default=0.05)
    p_sqf.add_argument("--every", type=int, default=3)
    p_sqf.add_argument("--m-limit", type=int, default=5)
    p_sqf.add_argument("--max-iterations", type=int, default=64)

    p_spec = sub.add_parser(
        "spectrum", parents=[common], help="sweep the anneal spectrum"
    )
    p_spec.add_argument("problem")
    p_spec.add_argument("--schedule", default=None, help="schedule CSV (s, A_GHz, B_GHz)")
    p_spec.add_argument("--e-scale", type=float, default=5.0, help="linear schedule peak, GHz")
    p_spec.add_argument("--grid", type=int, default=201, help="number of anneal fractions")
    p_spec.add_argument("--k", type=int, default=2, help="eigenvalues per grid point")
    p_spec.add_argument(
        "--freeze-discriminating",
        action="store_true",
        help="also sweep after freezing the variable separating the two lowest states",
    )

    p_conv = sub.add_parser("convert", parents=[common], help="convert qubo <-> ising")
    p_conv.add_argument("problem")
    p_conv.add_argument("--to", choices=("ising", "qubo"), required=True)
    return parser


def _resolved_argv(args: argparse.Namespace) -> list[str]:
    """Reconstruct a complete argument vector with every default materialized."""
    argv = [args.command]
    if args.command == "generate":
        argv.append(args.kind)
        argv += ["--n", str(args.n)]
        if args.kind == "nae3sat":
            argv += ["--rho", _fmt(args.rho)]
            argv.append("--plant" if args.plant else "--no-plant")
        if args.out:
            argv += ["--out", args.out]
    else:
        argv.append(str(Path(args.problem).resolve()))
    if args.command == "solve":
        argv += ["--sampler", args.sampler]
    if args.command == "sqf":
        argv += [
            "--strategy", args.strategy,
            "--threshold", _fmt(args.threshold),
            "--increment", _fmt(args.increment),
            "--every", str(args.every),
            "--m-limit", str(args.m_limit),
            "--max-iterations", str(args.max_iterations),
        ]
    if args.command in ("solve", "sqf"):
        argv += [
            "--shots", str(args.shots),
            "--sweeps", str(args.sweeps),
            "--beta-min", _fmt(args.beta_min),
            "--beta-max", _fmt(args.beta_max),
        ]
    if args.command == "spectrum":
        if args.schedule:
            argv += ["--schedule", str(Path(args.schedule).resolve())]
        argv += ["--e-scale", _fmt(args.e_scale), "--grid", str(args.grid), "--k", str(args.k)]
        if args.freeze_discriminating:
            argv.append("--freeze-discriminating")
    if args.command == "convert":
        argv += ["--to", args.to]
    argv += [
        "--seed", str(args.seed),
        "--out-dir", str(Path(args.out_dir).resolve()),
        "--format", args.format,
    ]
    return argv


def _manifest_name(args: argparse.Namespace) -> str:
    if args.command == "generate":
        base = Path(args.out or f"{args.kind}_n{args.n}_seed{args.seed}.json").stem
    else:
        base = _stem(args.problem)
    return f"{base}.{args.command}.manifest.json"


def _write_manifest(
    args: argparse.Namespace, inputs: list[str], outputs: list[str]
) -> str:
    name = _manifest_name(args)
    manifest = {
        "command": args.command,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "seed": args.seed,
        "argv": _resolved_argv(args),
        "inputs": [str(Path(p).resolve()) for p in inputs],
        "outputs": outputs,
    }
    _write_json(manifest, Path(args.out_dir) / name)
    return name


def rerun_manifest(manifest_path: str | os.PathLike, out_dir: Optional[str] = None) -> int:
    """Re-execute a recorded run. Outputs are byte-identical to the original
    (the fresh manifest differs only in its timestamp). out_dir overrides the
    recorded output directory, e.g. to compare against the original files.
    """
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = list(manifest["argv"])
    if out_dir is not None:
        at = argv.index("--out-dir")
        argv[at + 1] = str(out_dir)
    return main(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        inputs, outputs = _HANDLERS[args.command](args)
        _write_manifest(args, inputs, outputs)
    except (SqfreezeError, OSError, json.JSONDecodeError) as exc:
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__}),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
