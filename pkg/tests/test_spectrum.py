import itertools
import math

import mpmath
import numpy as np
import pytest

from sqfreeze.errors import (
    ProblemFormatError,
    SizeLimitError,
    ValidationError,
)
from sqfreeze.generators import random_complete_ising
from sqfreeze.model import IsingModel, SpinAssignment, energy
from sqfreeze.samplers import classical_spectrum
from sqfreeze.spectrum import (
    AnnealSchedule,
    SpectrumSweep,
    build_hamiltonian,
    discriminating_qubit,
    gap_report_to_dict,
    gap_widening_experiment,
    linear_schedule,
    min_gap,
    schedule_from_csv,
    schedule_to_csv,
    sweep_spectrum,
    sweep_to_csv,
)

COARSE_GRID = np.linspace(0.0, 1.0, 41)


class TestSchedules:
    def test_linear_defaults(self):
        sched = linear_schedule()
        assert sched.a(0.0) == 5.0
        assert sched.b(0.0) == 0.0
        assert sched.a(1.0) == 0.0
        assert sched.b(1.0) == 5.0

    def test_linear_interpolates(self):
        sched = linear_schedule(2.0)
        assert sched.a(0.25) == pytest.approx(1.5)
        assert sched.b(0.25) == pytest.approx(0.5)

    def test_needs_two_points(self):
        with pytest.raises(ValidationError):
            AnnealSchedule(points=((0.0, 1.0, 0.0),))

    def test_must_span_unit_interval(self):
        with pytest.raises(ValidationError):
            AnnealSchedule(points=((0.0, 1.0, 0.0), (0.9, 0.0, 1.0)))

    def test_s_strictly_increasing(self):
        with pytest.raises(ValidationError):
            AnnealSchedule(
                points=((0.0, 1.0, 0.0), (0.5, 0.5, 0.5), (0.5, 0.2, 0.8), (1.0, 0.0, 1.0))
            )

    def test_a_must_decrease(self):
        with pytest.raises(ValidationError):
            AnnealSchedule(
                points=((0.0, 1.0, 0.0), (0.5, 1.5, 0.5), (1.0, 0.0, 1.0))
            )

    def test_endpoints_must_vanish(self):
        with pytest.raises(ValidationError):
            AnnealSchedule(points=((0.0, 5.0, 0.0), (1.0, 1.0, 5.0)))

    def test_small_hardware_tails_accepted(self):
        # published hardware schedules end slightly above zero
        sched = AnnealSchedule(points=((0.0, 5.0, 0.05), (1.0, 0.08, 5.0)))
        assert sched.a(1.0) == pytest.approx(0.08)

    def test_csv_round_trip(self, tmp_path):
        sched = AnnealSchedule(
            points=((0.0, 4.0, 0.0), (0.5, 1.5, 2.25), (1.0, 0.0, 4.5))
        )
        path = tmp_path / "sched.csv"
        schedule_to_csv(sched, path)
        assert schedule_from_csv(path).points == sched.points

    def test_csv_skips_header_and_comments(self, tmp_path):
        path = tmp_path / "sched.csv"
        path.write_text("s,A_GHz,B_GHz\n# comment\n0,3,0\n1,0,3\n")
        sched = schedule_from_csv(path)
        assert sched.points == ((0.0, 3.0, 0.0), (1.0, 0.0, 3.0))

    def test_csv_bad_row_reports_line(self, tmp_path):
        path = tmp_path / "sched.csv"
        path.write_text("0,3,0\n0.5,oops,1.5\n1,0,3\n")
        with pytest.raises(ProblemFormatError, match="line 2"):
            schedule_from_csv(path)

    def test_csv_needs_two_rows(self, tmp_path):
        path = tmp_path / "sched.csv"
        path.write_text("s,A,B\n0,1,0\n")
        with pytest.raises(ProblemFormatError):
            schedule_from_csv(path)


class TestBuildHamiltonian:
    def test_pure_driver_single_spin(self):
        m = IsingModel(labels=(0,), biases={0: 0.0})
        h = build_hamiltonian(m, linear_schedule(1.0), 0.0)
        assert np.allclose(h, [[0.0, -1.0], [-1.0, 0.0]])

    def test_diagonal_at_end_is_classical(self):
        m = IsingModel(
            labels=(0, 1), biases={0: 1.0, 1: -0.5}, couplings={(0, 1): 0.75}, offset=7.0
        )
        h = build_hamiltonian(m, linear_schedule(1.0), 1.0)
        # index order: (-1,-1), (-1,+1), (+1,-1), (+1,+1); offset excluded
        expected = []
        for s0, s1 in itertools.product((-1, 1), repeat=2):
            expected.append(1.0 * s0 - 0.5 * s1 + 0.75 * s0 * s1)
        assert np.allclose(np.diag(h), expected)
        assert np.allclose(h - np.diag(np.diag(h)), 0.0)

    def test_symmetric(self):
        m = random_complete_ising(4, seed=0)
        h = build_hamiltonian(m, linear_schedule(), 0.3)
        assert np.array_equal(h, h.T)

    def test_off_diagonal_is_single_flips_only(self):
        m = IsingModel(labels=(0, 1), biases={0: 1.0})
        h = build_hamiltonian(m, linear_schedule(2.0), 0.5)
        assert h[0, 1] == pytest.approx(-1.0)  # flip second spin
        assert h[0, 2] == pytest.approx(-1.0)  # flip first spin
        assert h[0, 3] == 0.0  # double flip: no matrix element
        assert h[1, 2] == 0.0

    def test_fraction_out_of_range(self):
        m = IsingModel(labels=(0,))
        with pytest.raises(ValidationError):
            build_hamiltonian(m, linear_schedule(), 1.5)

    def test_size_guard_names_limit(self):
        m = IsingModel(labels=tuple(range(15)))
        with pytest.raises(SizeLimitError, match="14"):
            build_hamiltonian(m, linear_schedule(), 0.0)


class TestSweepSpectrum:
    def test_driver_ground_energy(self):
        # at s=0 the ground state is the uniform superposition at -n * A(0)
        for seed in (0, 1, 2):
            m = random_complete_ising(5, seed=seed)
            sweep = sweep_spectrum(m, linear_schedule(), s_grid=[0.0], k=1)
            assert sweep.levels[0, 0] == pytest.approx(-5 * 5.0, abs=1e-8)

    def test_problem_end_matches_classical_spectrum(self):
        m = random_complete_ising(4, seed=3)
        sweep = sweep_spectrum(m, linear_schedule(), s_grid=[1.0], k=16)
        quantum = sorted(sweep.levels[0])
        classical = []
        for e, deg in classical_spectrum(m):
            classical.extend([5.0 * (e - m.offset)] * deg)
        assert np.allclose(quantum, sorted(classical), atol=1e-8)

    def test_high_precision_oracle(self):
        # recompute three interior grid points with 30-digit arithmetic
        m = random_complete_ising(3, seed=5)
        sched = linear_schedule()
        sweep = sweep_spectrum(m, sched, s_grid=[0.25, 0.5, 0.75], k=4)
        mpmath.mp.dps = 30
        for row, s in enumerate((0.25, 0.5, 0.75)):
            hmat = build_hamiltonian(m, sched, s)
            exact, _ = mpmath.eigsy(mpmath.matrix(hmat.tolist()))
            for j in range(4):
                assert sweep.levels[row, j] == pytest.approx(
                    float(exact[j]), abs=1e-9
                )

    def test_agrees_with_second_solver(self):
        m = random_complete_ising(4, seed=6)
        sched = linear_schedule()
        sweep = sweep_spectrum(m, sched, s_grid=COARSE_GRID, k=3)
        for row, s in enumerate(COARSE_GRID):
            alt = np.linalg.eigvalsh(build_hamiltonian(m, sched, float(s)))[:3]
            assert np.allclose(sweep.levels[row], alt, atol=1e-8)

    def test_single_qubit_analytic_gap(self):
        m = IsingModel(labels=(0,), biases={0: 1.0})
        sched = linear_schedule()
        sweep = sweep_spectrum(m, sched, k=2)
        for s, row in zip(sweep.s_grid, sweep.levels):
            a, b = sched.a(s), sched.b(s)
            assert row[1] - row[0] == pytest.approx(
                2.0 * math.sqrt(a * a + b * b), abs=1e-9
            )

    def test_degenerate_classical_gap_closes(self):
        m = IsingModel(labels=(0, 1), couplings={(0, 1): 1.0})
        sweep = sweep_spectrum(m, linear_schedule(), s_grid=[1.0], k=2)
        assert sweep.levels[0, 1] - sweep.levels[0, 0] == pytest.approx(0.0, abs=1e-9)

    def test_default_grid_has_201_points(self):
        m = IsingModel(labels=(0,), biases={0: 1.0})
        sweep = sweep_spectrum(m, linear_schedule(), k=1)
        assert len(sweep.s_grid) == 201
        assert sweep.s_grid[0] == 0.0
        assert sweep.s_grid[-1] == 1.0

    def test_k_validation(self):
        m = IsingModel(labels=(0,))
        with pytest.raises(ValidationError):
            sweep_spectrum(m, linear_schedule(), s_grid=[0.5], k=0)
        with pytest.raises(ValidationError):
            sweep_spectrum(m, linear_schedule(), s_grid=[0.5], k=3)

    def test_grid_validation(self):
        m = IsingModel(labels=(0,))
        with pytest.raises(ValidationError):
            sweep_spectrum(m, linear_schedule(), s_grid=[0.5, 1.2])

    def test_threads_do_not_change_result(self):
        m = random_complete_ising(4, seed=8)
        sched = linear_schedule()
        one = sweep_spectrum(m, sched, s_grid=COARSE_GRID, k=2, threads=1)
        four = sweep_spectrum(m, sched, s_grid=COARSE_GRID, k=2, threads=4)
        assert np.array_equal(one.levels, four.levels)

    def test_threads_env_variable(self, monkeypatch):
        monkeypatch.setenv("SQF_THREADS", "3")
        m = random_complete_ising(3, seed=9)
        sweep = sweep_spectrum(m, linear_schedule(), s_grid=COARSE_GRID, k=2)
        base = sweep_spectrum(
            m, linear_schedule(), s_grid=COARSE_GRID, k=2, threads=1
        )
        assert np.array_equal(sweep.levels, base.levels)


class TestMinGap:
    def test_location_and_value(self):
        levels = np.array([[0.0, 2.0], [0.0, 1.0], [0.0, 3.0]])
        report = min_gap(SpectrumSweep(s_grid=(0.0, 0.5, 1.0), levels=levels, k=2))
        assert report.min_gap == 1.0
        assert report.s_at_min == 0.5
        assert report.gap_curve == ((0.0, 2.0), (0.5, 1.0), (1.0, 3.0))

    def test_tie_takes_first(self):
        levels = np.array([[0.0, 1.0], [0.0, 1.0]])
        report = min_gap(SpectrumSweep(s_grid=(0.0, 1.0), levels=levels, k=2))
        assert report.s_at_min == 0.0

    def test_needs_two_levels(self):
        sweep = SpectrumSweep(s_grid=(0.0,), levels=np.array([[1.0]]), k=1)
        with pytest.raises(ValidationError):
            min_gap(sweep)


class TestDiscriminatingQubit:
    def test_separable_spins(self):
        m = IsingModel(labels=(1, 2), biases={1: -1.0, 2: -0.1})
        assert discriminating_qubit(m) == (2, 1)

    def test_degenerate_ground_tie_break(self):
        # ground manifold {(-1,+1), (+1,-1)}: the lexicographic pick is
        # (-1,+1) and the next distinct energy is first reached at (-1,-1)
        m = IsingModel(labels=(1, 2), couplings={(1, 2): 1.0})
        assert discriminating_qubit(m) == (2, 1)

    def test_matches_brute_force(self):
        m = random_complete_ising(5, seed=3)
        table = []
        for combo in itertools.product((-1, 1), repeat=5):
            x = SpinAssignment(values=dict(zip(m.labels, combo)))
            table.append((combo, energy(m, x)))
        e0 = min(e for _, e in table)
        ground = next(c for c, e in table if e == e0)
        e1 = min(e for _, e in table if e > e0)
        excited = next(c for c, e in table if e == e1)
        pos = next(k for k in range(5) if ground[k] != excited[k])
        assert discriminating_qubit(m) == (m.labels[pos], ground[pos])

    def test_flat_spectrum_rejected(self):
        m = IsingModel(labels=(0, 1))
        with pytest.raises(ValidationError):
            discriminating_qubit(m)

    def test_enumeration_guard(self):
        m = IsingModel(labels=tuple(range(26)))
        with pytest.raises(SizeLimitError):
            discriminating_qubit(m)


class TestGapWidening:
    def test_rejects_single_variable(self):
        with pytest.raises(ValidationError):
            gap_widening_experiment(1, [0])

    def test_rows_are_well_formed(self):
        rows = gap_widening_experiment(3, [0, 1], s_grid=COARSE_GRID)
        assert [r.seed for r in rows] == [0, 1]
        for r in rows:
            assert r.gap_before > 0.0
            assert r.gap_after > 0.0
            assert r.ratio == pytest.approx(r.gap_after / r.gap_before)
            assert r.frozen_value in (-1, 1)

    def test_schedule_changes_gaps(self):
        default = gap_widening_experiment(3, [0], s_grid=COARSE_GRID)
        scaled = gap_widening_experiment(
            3, [0], schedule=linear_schedule(10.0), s_grid=COARSE_GRID
        )
        assert scaled[0].gap_before == pytest.approx(2 * default[0].gap_before, abs=1e-8)


class TestOutputs:
    def test_sweep_csv_shape(self, tmp_path):
        m = IsingModel(labels=(0,), biases={0: 1.0})
        sweep = sweep_spectrum(m, linear_schedule(), s_grid=[0.0, 0.5, 1.0], k=2)
        path = tmp_path / "sweep.csv"
        sweep_to_csv(sweep, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "s,E_0,E_1"
        assert len(lines) == 4
        values = [float(v) for v in lines[2].split(",")]
        assert values[0] == 0.5
        assert values[1] <= values[2]

    def test_gap_report_dict(self):
        levels = np.array([[0.0, 2.0], [0.0, 1.5]])
        report = min_gap(SpectrumSweep(s_grid=(0.0, 1.0), levels=levels, k=2))
        assert gap_report_to_dict(report) == {"min_gap": 1.5, "s_at_min": 1.0}
