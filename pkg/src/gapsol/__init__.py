"""Ground states of nonlinear Schrodinger equations with periodic-plus-defect
potentials, computed by energy minimization on the natural constraint set."""

__version__ = "0.1.0"

from .errors import (
    BracketFailureError,
    ConfigError,
    ConvergenceError,
    DegenerateCentroidError,
    FieldError,
    FieldFormatError,
    GapsolError,
    GridMismatchError,
    HypothesisViolationError,
    LinearSolveError,
    ModelError,
    ProjectionError,
)
from .grid import (
    Field,
    GridSpec,
    centroid,
    constant_field,
    dirichlet,
    gradient,
    inner_h1v,
    inner_l2,
    integrate,
    laplacian,
    lp_norm,
    random_smooth_field,
    sample_function,
    translate,
)
from .fieldio import read_field, write_field
from .model import (
    CoefficientSpec,
    DefectSpec,
    HypothesisReport,
    NonlinearitySpec,
    PotentialSpec,
    ProbeConfig,
    Problem,
    apply_F,
    apply_G,
    apply_f,
    apply_g,
    sample_model,
    validate_hypotheses,
    with_defect_amplitude,
    with_gamma_amplitude,
    zero_defect,
)
from .spectrum import SpectrumReport, assert_positive_spectrum, min_eigenvalue
from .nehari import (
    EnergyBreakdown,
    FiberScan,
    NehariPoint,
    energy,
    fiber_scan,
    pde_residual,
    project,
    psi,
    riesz_gradient,
    small_sphere_radius,
)
from .minimizer import (
    Certificate,
    GaussianInit,
    SolveReport,
    SolverOptions,
    SweepEntry,
    certify,
    solve_ground_state,
    sweep,
)
from .diagnostics import (
    Bump,
    ComparisonReport,
    DecayFit,
    ProfileDecomposition,
    TranslateEntry,
    bump_decomposition,
    compare_cper,
    decay_fit,
    residual_check,
    translate_energy_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
