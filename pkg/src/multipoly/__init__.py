"""Multipolynomials, block-symmetric multilinear maps, their norms and summing constants."""

from .errors import MultipolyError
from .norms import (
    NormSpec,
    chain_constant,
    coeff_upper_bound,
    grid_bracket,
    multilinear_norm_lower,
    norm_chain_report,
    poly_norm_lower,
)
from .polymap import (
    Multipolynomial,
    canonicalize,
    check,
    compose_poly,
    eval_poly,
    from_black_box,
    hat,
    id_multipolynomial,
)
from .seqclass import ClassKind, FiniteSequence, LInf, Lp, WeakLp, seq_norm, weak_norm
from .summing import (
    ClassTriple,
    check_ev_equivalence,
    check_symmetrization_stability,
    induced_map,
    pi_chain_report,
    pi_lower_estimate,
    shifted_residual,
)
from .symmetry import (
    block_symmetrize,
    is_block_symmetric,
    is_fully_symmetric,
    polarization_constant,
    polarize,
)
from .tensor_core import (
    BlockShape,
    MultilinearMap,
    eval_multilinear,
    make_multilinear,
    permute_arguments,
)

__all__ = [
    "block_symmetrize",
    "BlockShape",
    "canonicalize",
    "chain_constant",
    "check",
    "check_ev_equivalence",
    "check_symmetrization_stability",
    "ClassKind",
    "ClassTriple",
    "coeff_upper_bound",
    "compose_poly",
    "eval_multilinear",
    "eval_poly",
    "FiniteSequence",
    "from_black_box",
    "grid_bracket",
    "hat",
    "id_multipolynomial",
    "induced_map",
    "is_block_symmetric",
    "is_fully_symmetric",
    "LInf",
    "Lp",
    "make_multilinear",
    "multilinear_norm_lower",
    "MultilinearMap",
    "MultipolyError",
    "Multipolynomial",
    "norm_chain_report",
    "NormSpec",
    "permute_arguments",
    "pi_chain_report",
    "pi_lower_estimate",
    "polarization_constant",
    "polarize",
    "poly_norm_lower",
    "seq_norm",
    "shifted_residual",
    "weak_norm",
    "WeakLp",
]

__version__ = "0.1.0"
