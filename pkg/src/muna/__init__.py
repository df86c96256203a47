"""Separability analysis of finitely presented monounary algebras.

Finite algebras are exact value tables (``muna.core``); a useful class of
infinite algebras is described finitely by skeletons with backward rays,
fans and forward-ray ports (``muna.presentation``).  Symbolic decision
procedures for residual finiteness, subalgebra separability and complete
separability live in ``muna.analysis``; executable separating
homomorphisms in ``muna.witness``; brute-force cross-validation in
``muna.oracle``; and the DSL command line in ``muna.cli``.
"""

from .core import (
    FiniteAlgebra,
    cycle,
    is_homomorphism,
    line,
    make,
    product,
    trichotomy,
    trivial,
)
from .presentation import (
    FanNode,
    ForwardNode,
    Presentation,
    RayNode,
    SkeletonNode,
    from_algebra,
    make_presentation,
    unfold,
    validate,
)
from .analysis import (
    classify,
    classify_variety,
    is_backwards_bounded,
    is_bi_eternal,
    is_cs,
    is_rf,
    is_ss,
    rf_product,
)
from .witness import cs_separator, lambda_hom, separate_points, verify, z_mod_hom
from .oracle import brute_separable, cross_validate, enumerate_algebras, enumerate_homs

__version__ = "0.1.0"

__all__ = [
    "FiniteAlgebra",
    "Presentation",
    "SkeletonNode",
    "RayNode",
    "FanNode",
    "ForwardNode",
    "make",
    "line",
    "cycle",
    "trivial",
    "product",
    "trichotomy",
    "is_homomorphism",
    "make_presentation",
    "from_algebra",
    "validate",
    "unfold",
    "classify",
    "classify_variety",
    "is_rf",
    "is_ss",
    "is_cs",
    "is_backwards_bounded",
    "is_bi_eternal",
    "rf_product",
    "lambda_hom",
    "separate_points",
    "cs_separator",
    "z_mod_hom",
    "verify",
    "enumerate_homs",
    "enumerate_algebras",
    "brute_separable",
    "cross_validate",
]
