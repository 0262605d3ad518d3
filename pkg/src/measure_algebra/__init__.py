"""Numerical engine for the convolution algebra of complex measures on R^n (n <= 3)."""

from .ac_algebra import (
    ACMeasure,
    Decision,
    LevyDensityDecomposition,
    cramer_wold_check,
    invert_ac,
    is_invertible_ac,
    levy_decompose,
    winding_ac,
)
from .banach_gfs import (
    AElement,
    BanachGFS,
    check_invertible_banach_gfs,
    gelfand_eval,
    invert_banach_gfs_dominant,
    log_banach_gfs_dominant,
)
from .charfn import (
    CFGrid,
    LogPath,
    distinguished_log,
    eval_cf,
    inf_abs_estimate,
    sample_cf_line,
    winding_index_1d,
)
from .errors import MeasureAlgebraError
from .factorization import (
    CLK0Triplet,
    TaylorFactorization,
    conv_power,
    eval_clk0,
    factorize,
    to_clk0,
)
from .lattice_gfs import (
    LatticeGFS,
    certify_invertible_lattice,
    cramer_wold_discrete,
    exp_lattice,
    invert_lattice,
    log_lattice_dominant,
)
from .measure_core import (
    ComplexMeasure,
    GridDensity,
    SlabComponent,
    atomic,
    canonicalize,
    convolve,
    density_measure,
    dirac,
    exp_measure,
    linear_combine,
    product_measure,
    project_line,
    pushforward_orthogonal,
    total_mass,
    tv_norm,
)
from .sigma import (
    embed_sigma_slab,
    sigma_log_cf,
    sigma_log_cf_quadrature,
    sigma_power_cf,
    sigma_power_measure,
)
