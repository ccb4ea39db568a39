"""Exact-arithmetic toolkit for cut-and-project point sets.

Generates model sets from rational lattices and flagged-box windows,
applies discretized linear maps to integer point sets, and measures
almost-periodicity quantities (windowed densities, near-translations,
window matching) with every number an exact rational.
"""

from .errors import (
    BudgetError,
    DimensionMismatchError,
    DomainError,
    FormatError,
    QuasigridError,
    SingularMatrixError,
)
from .ratmath import (
    IntervalBox,
    RMatrix,
    ball_volume,
    invert_matrix,
    preimage_bounds,
    rat,
    round_scalar,
    round_vector,
    vec,
)
from .pointset import (
    DelonePair,
    PointSet,
    delone_estimate,
    read_qps,
    restrict,
    sym_diff,
    translate,
    write_qps,
)
from .cutproject import (
    CutProjectScheme,
    ModelSetPatch,
    Window,
    enumerate_model_set,
    image_scheme,
    iterated_scheme,
    read_scheme,
    translation_set,
    window_inflation_density,
    write_scheme,
    zn_scheme,
)
from .discretize import (
    MapChain,
    apply_chain,
    apply_hat,
    chain_model_witness,
    read_chain,
    sample_sl2_chain,
    write_chain,
)
from .rng import RngState
from .analysis import (
    DensityProfile,
    TranslationReport,
    density_R,
    density_R_plus,
    epsilon_translations,
    subadditivity_check,
    uniform_density,
    weak_ap_probe,
)

__version__ = "0.1.0"
