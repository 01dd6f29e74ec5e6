"""Simulated coupled-oscillator solver for max-cut and graph coloring.

Problems map onto symmetric coupling matrices; noisy Kuramoto-style phase
dynamics with sub-harmonic locking anneal the system toward low-energy
states, and thresholded phases read out discrete solutions.
"""

from .model import (
    CouplingMatrix,
    Graph,
    PhaseState,
    SolverParams,
    StateAssignment,
    coloring_conflicts,
    continuous_energy,
    cut_value,
    ising_energy,
    potts_energy,
    threshold_phases,
)
from .dynamics import (
    KsSchedule,
    NoiseSource,
    NumericalError,
    RunResult,
    euler_step,
    ks_at,
    phase_drift,
    run,
    run_replica_set,
    run_replicas,
)
from .problems import (
    ParseError,
    ProblemInstance,
    build_coloring_coupling,
    build_maxcut_coupling,
    generate_colorable_graph,
    load_dimacs_col,
    load_gset,
    load_instance,
    parse_dimacs_col,
    parse_gset,
    save_gset,
    write_dimacs_col,
    write_gset,
)
from .bruteforce import exact_maxcut, exact_min_conflicts

__version__ = "0.1.0"
