"""fiolab: a numerical laboratory for global Fourier integral operators on
modulation spaces.

Core layers:

* grid      -- truncated uniform grids, the 2-pi Fourier convention,
               time-frequency shifts, dilations, L^p norms
* gabor     -- STFT and inversion, Gabor frames, dual and tight windows
* norms     -- weighted modulation norms, FL^p, sequence norms, dilation
               exponent fits
* symbols   -- product-estimate symbol/phase classes with validators,
               dyadic decompositions, the diffeomorphism library
* operators -- Kohn-Nirenberg/Weyl/FIO quantizations, structural identity
               checks, Gabor matrices, Schur certificates, operator norms
* experiments -- norm-growth threshold experiments in both directions
* cli       -- reproducible experiment runner with manifests and CSV output
"""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    GridSpec,
    Signal,
    Generator,
    WeightSpec,
    bump_generator,
    default_grid,
    dilate,
    fourier_transform,
    gaussian_generator,
    inner_product,
    inverse_fourier,
    lp_norm,
    modulate,
    translate,
)
from .gabor import (  # noqa: F401
    GaborLattice,
    Window,
    dual_window,
    frame_bounds,
    frame_operator,
    gabor_analysis,
    gabor_synthesis,
    istft,
    stft,
    tight_window,
)
from .norms import fl_norm, mod_norm, seq_norm  # noqa: F401
from .symbols import (  # noqa: F401
    PhaseSpec,
    SymbolSpec,
    make_diffeo,
    phase_from_name,
    symbol_from_name,
)
from .operators import OperatorHandle, gabor_matrix, op_norm_estimate  # noqa: F401
