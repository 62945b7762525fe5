"""Analog sparse decomposition in finitely generated shift-invariant spaces."""

__version__ = "0.1.0"

from .sispace import (  # noqa: E402
    CoeffSpectra,
    FrequencyGrid,
    GeneratorBank,
    RieszBounds,
    SpectralMatrix,
    cross_spectrum,
    dtft,
    gram_matrix,
    idtft,
    is_orthonormal,
    riesz_bounds,
    signal_norm,
    synthesize_samples,
)
from .coherence import analog_coherence, dictionary_coherence, uncertainty_check  # noqa: E402
from .bases import (  # noqa: E402
    change_basis,
    fourier_basis,
    lpf_train,
    sinc_frame,
    spike_basis,
    spike_fourier_pair,
    unitary_mixed_basis,
)
from .mmv import MmvProblem, ctf_reduce, kruskal_rank, l0_oracle, l1_mmv_solve, support_recover  # noqa: E402
from .decompose import (  # noqa: E402
    decompose_frame,
    decompose_rich,
    decompose_two_onb_constant,
    detect_constant_structure,
    recover_on_support,
)
