"""Principal eigenvalues of the fractional Laplacian with indefinite weights,
and their optimization over rearrangement classes of the weight."""

from .eigensolver import (
    ConvergenceError,
    DenseSpectrum,
    EigenResult,
    dense_spectrum,
    gateaux_differential,
    solve_lambda_neg1,
    solve_mu1,
)
from .grid import Grid, build_disk, build_interval, build_rectangle, parse_domain
from .nonlocal_form import KernelParams, StiffnessOperator, assemble
from .optimizer import (
    OptimizerTrace,
    check_upper_bound,
    maximize_lambda1_fw,
    maximize_lambda_neg1,
    minimize_lambda1,
    steiner_report,
    verify_characterization,
)
from .rearrangement import (
    WeightClass,
    decreasing_rearrangement,
    distribution_function,
    equimeasurable,
    linear_maximize,
    linear_minimize,
    majorizes,
    parse_weights,
    steiner_symmetrize,
    symmetry_error,
)

__version__ = "0.1.0"
