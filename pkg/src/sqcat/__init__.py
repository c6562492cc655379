"""Truncated-Fock-space simulation of superpositions of oppositely squeezed states."""

from .fock import (
    FockVector,
    HeraldResult,
    LayoutError,
    ModeLayout,
    OperatorMatrix,
    SqueezeParams,
    TruncationError,
    TruncationWarning,
    apply,
    apply_beam_splitter,
    beam_splitter_matrix,
    coherent_cat,
    coherent_state,
    displacement_matrix,
    fock_state,
    overlap,
    project_fock,
    single_mode_squeezer,
    squeezed_cat,
    squeezed_vacuum,
    tensor_product,
    two_mode_squeezed_vacuum,
    two_mode_squeezer,
    vacuum,
)

__version__ = "0.1.0"
