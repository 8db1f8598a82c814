"""
Experiment harness: configs, grid runners and CSV output.
"""

from .config import (
    ExperimentConfig,
    ExperimentKind,
    GridSection,
    LdpSection,
    ModelKind,
    ModelSection,
    NRule,
    OutputSection,
    SearchMode,
    SolverSection,
)
from .exceptions import ConfigValidationError, ExperimentError, ExperimentIOError
from .output import csv_metadata, render_csv, write_csv
from .runner import (
    CONVERGENCE_COLUMNS,
    build_instance,
    minimal_success_n,
    run_compare,
    run_convergence,
    run_experiment,
    run_ldp_table,
    run_phase,
    run_rank_sweep,
)

__all__ = [
    # Configuration
    "ExperimentConfig",
    "ExperimentKind",
    "ModelKind",
    "ModelSection",
    "GridSection",
    "SolverSection",
    "LdpSection",
    "OutputSection",
    "NRule",
    "SearchMode",
    # Runners
    "CONVERGENCE_COLUMNS",
    "run_experiment",
    "run_convergence",
    "run_phase",
    "run_rank_sweep",
    "run_compare",
    "run_ldp_table",
    "minimal_success_n",
    "build_instance",
    # Output
    "csv_metadata",
    "render_csv",
    "write_csv",
    # Exceptions
    "ExperimentError",
    "ConfigValidationError",
    "ExperimentIOError",
]
