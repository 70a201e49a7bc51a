"""Floquet-Bloch spectral toolkit for periodic operators on tori.

Implements, at desk scale, the quantitative machinery behind absence of
eigenvalues for periodic Schrodinger operators with transversal product
metrics: the shifted operator family H(theta), its mode-wise resolvent,
spectral-cluster projections, Carleman and L^p estimates, the conformal
gauge reduction, and the discrete Floquet-Bloch-Gelfand transform.
"""

__version__ = "0.1.0"

from .grids import (
    FrequencyBlock,
    GridFunction,
    TorusGrid,
    lebesgue_norm,
    lp_decompose,
    weighted_inner,
    x1_fourier_modes,
)
from .modes import ModeCoefficients, TensorModeSpace, from_grid
from .operators import (
    FullMetric,
    ShiftParameters,
    build_floquet_matrix,
    build_tensor_floquet_matrix,
    coercivity_scan,
    conformal_potential,
    evaluate_form,
    flat_full_metric,
    mu,
    verify_conformal_identity,
)
from .resolvent import (
    EigenvalueList,
    SeriesReport,
    apply_G_tau,
    cluster_project,
    correction_coefficients,
    im_sqrt_shift,
    project_mode,
    reference_resolvent,
    series_S,
)
from .estimates import (
    EstimateReport,
    carleman_min_modulus,
    cluster_constant,
    injectivity_estimate,
    lp_operator_bound_lower,
    resolvent_lp_bounds,
    split_potential,
)
from .gelfand import (
    BlochField,
    SupercellFunction,
    band_structure,
    direct_integral_check,
    gelfand_forward,
    gelfand_inverse,
    thomas_scan,
)
from .transverse import (
    TransverseBasis,
    TransverseMetric,
    assemble_forms,
    eigendecompose,
    flat_lattice_eigenvalues,
)
