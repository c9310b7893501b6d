"""Numerical laboratory for triple-well phase-field energies on the unit disk.

The package computes heteroclinic surface tensions of a triple-well
potential, solves Young's law for the junction angles, minimizes the
scaled two-component energy on the unit disk under three-phase boundary
data, and measures every interface statistic entering the energy upper
and lower bounds (y*, mu1, mu2, beta, the envelope functionals and the
case-2 strictness gap).
"""

from .errors import (
    ConfigurationError,
    ConvergenceFailureError,
    HypothesisViolationError,
)
from .potential import (
    LocalQuadraticConstants,
    Potential,
    PotentialCertification,
    SamplingSpec,
    certify_potential,
    estimate_local_constants,
    make_polynomial_potential,
    make_product_potential,
    two_well_slice,
)
from .connections import (
    HeteroclinicProfile,
    SurfaceTensions,
    assemble_tensions,
    compute_connection,
    perturbed_endpoint_check,
)
from .junction import JunctionAngles, TriodPartition, build_triod, sharp_map, solve_angles
from .boundary import BoundaryTrace, constant_trace, make_trace, smoothstep, trace_samples
from .disk import (
    DiskField,
    DiskGrid,
    EnergyBreakdown,
    SolverOptions,
    build_grid,
    competitor,
    check_apriori,
    energy,
    load_field,
    minimize,
    sharp_field,
    write_field,
)
from .diagnostics import (
    BoundReport,
    InterfaceStats,
    bound_report,
    case2_envelope,
    interface_stats,
    lambda_profiles,
    locate_ystar,
    lower_bound_envelope,
    measure_mu,
    rotated_energy_account,
)
from .envelope import (
    EnvelopeScan,
    case2_gap_identity,
    reduced_envelope,
    scan_reduced_envelope,
)

__version__ = "0.1.0"
