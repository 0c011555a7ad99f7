"""Cohen-class time-frequency representations, their operators, sharp
constants and Donoho-Stark type uncertainty bounds on uniform grids."""

from .constants import babenko, c_const, cohen_norm_bound, h_const, loc_norm_bound, wigner_bounded
from .grid import (
    Grid,
    MeasurableSet,
    Signal,
    as_exponent,
    conjugate,
    dilate,
    gaussian,
    interval_set,
    lp_norm,
    make_grid,
    set_measure,
    tf_shift,
)
from .operators import (
    OperatorMatrix,
    adjoint,
    apply,
    cohen_op_matrix,
    localization_matrix,
    operator_norm,
    weyl_matrix,
)
from .transforms import (
    Dirac,
    Sampled,
    SeparableGaussianWigner,
    TFFunction,
    cohen_rep,
    gabor,
    wigner,
    wigner_via_gabor,
)
from .uncertainty import (
    ConcentrationReport,
    cohen_FG,
    cohen_up_bound,
    ds_bound_at,
    ds_bound_optimize,
    ds_classical_bound,
    epsilon_concentration,
    measured_epsilons,
    scaling_experiment,
)

__version__ = "0.1.0"
