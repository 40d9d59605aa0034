"""Diagonal decoherence channels on N-spin systems.

``popcore`` holds the product-operator and Hadamard-product algebra,
``gradflow`` turns gradient sequences into damping matrices, ``reps``
converts among Lindblad, Kraus and extended-Kraus forms, ``models`` builds
composite decoherence models, and ``cli`` is the ``declab`` command.
"""

from .gradflow import (
    ConditionalSandwich,
    Diffusion,
    GradientPulse,
    NotDiagonalError,
    Rotation,
    apply_damping,
    cnot,
    collective_generator,
    correlated_damping,
    damping_matrix,
    gradient_generator,
    independent_damping,
    rate_matrix,
    toffoli,
)
from .popcore import make_pauli_term, pauli_expand, pauli_string, walsh_hadamard
from .reps import (
    CorrelatedRates,
    ExtendedKrausCoeffs,
    KrausSet,
    LindbladSet,
    NonPSDError,
    extended_kraus_from_damping,
    kraus_from_damping,
    lindblad_from_generator,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalSandwich",
    "CorrelatedRates",
    "Diffusion",
    "ExtendedKrausCoeffs",
    "GradientPulse",
    "KrausSet",
    "LindbladSet",
    "NonPSDError",
    "NotDiagonalError",
    "Rotation",
    "apply_damping",
    "cnot",
    "collective_generator",
    "correlated_damping",
    "damping_matrix",
    "extended_kraus_from_damping",
    "gradient_generator",
    "independent_damping",
    "kraus_from_damping",
    "lindblad_from_generator",
    "make_pauli_term",
    "pauli_expand",
    "pauli_string",
    "rate_matrix",
    "toffoli",
    "walsh_hadamard",
]
