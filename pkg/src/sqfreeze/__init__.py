"""Statistical qubit freezing toolkit for Ising/QUBO optimization."""

__version__ = "0.1.0"

from .errors import (
    AssignmentMismatchError,
    EmptyConditionError,
    ProblemFormatError,
    SizeLimitError,
    SqfreezeError,
    ValidationError,
)
from .model import (
    FreezeDirective,
    IsingModel,
    QuboModel,
    SpinAssignment,
    energy,
    freeze,
    ising_to_qubo,
    load_problem,
    qubo_energy,
    qubo_to_ising,
    reconstruct,
    save_problem,
)
from .generators import (
    Nae3SatInstance,
    load_nae3sat,
    random_complete_ising,
    random_nae3sat,
    satisfaction_ratio,
    save_nae3sat,
)
from .samplers import (
    SamplerParams,
    SampleRecord,
    SampleSet,
    classical_spectrum,
    enumerate_exact,
    sample,
)
from .spectrum import (
    AnnealSchedule,
    GapReport,
    SpectrumSweep,
    build_hamiltonian,
    discriminating_qubit,
    gap_widening_experiment,
    linear_schedule,
    min_gap,
    schedule_from_csv,
    sweep_spectrum,
)
from .sqf import (
    FreezeRecord,
    SqfConfig,
    SqfRun,
    conditional_likeliness,
    effective_threshold,
    freezing_merit,
    graph_evolution,
    likeliness,
    likeliness_vector,
    run_report,
    run_sqf,
    select_candidates,
    sqf_step,
)
