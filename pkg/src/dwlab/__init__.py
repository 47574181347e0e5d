"""dwlab: a numerical laboratory for the double-well nonlinear Schrodinger
system -- eigensolver with parity-resolved splitting, split-step Fourier
dynamics, two-mode (dimer) reduction, and the invariance/energy diagnostics
connecting them."""

__version__ = "0.1.0"

from .diagnostics import (
    twomode_error_monitor,
    h0_sandwich_check,
    project,
    scaling_exponent,
    invariance_monitor,
)
from .dynamics import (
    BlowUpError,
    ObserverSet,
    Trajectory,
    energy,
    evolve,
    linear_beating_exact,
    step,
)
from .eigen import (
    SolverError,
    SpectralData,
    c_sigma,
    dense_hamiltonian,
    effective_eta,
    epsilon_for_eta,
    localization_report,
    lowest_eigenpairs,
    splitting_sweep,
)
from .fields import (
    ConsistencyError,
    Field,
    Grid,
    GridMismatchError,
    SimConfig,
    apply_H0,
    inner,
    norm0,
    norm_Xs,
    tail_mass,
)
from .kernels import BACKEND
from .potentials import (
    AgmonResult,
    Potential,
    PotentialConstructionError,
    agmon_distance,
    builtin_harmonic_barrier,
    builtin_quartic,
    verify_hypotheses,
)
from .twomode import (
    ScanTable,
    TwoModeParams,
    TwoModeState,
    TwoModeTrajectory,
    integrate,
    invariant_I,
    rhs,
    selftrap_scan,
)
