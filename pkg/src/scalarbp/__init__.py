"""Scalar-message belief propagation for quantum stabilizer codes."""

__version__ = "0.1.0"

from .bp4_scalar import DecoderConfig, ScalarBp4Decoder, decode, depolarizing_priors
from .code_factory import BicycleParams, build_bicycle, builtin_code
from .outcome import DecodeOutcome
from .pauli_core import CheckMatrix, CodeFormatError, PauliString, inner_product, is_stabilizer_element, syndrome

__all__ = [
    "BicycleParams",
    "CheckMatrix",
    "CodeFormatError",
    "DecodeOutcome",
    "DecoderConfig",
    "PauliString",
    "ScalarBp4Decoder",
    "build_bicycle",
    "builtin_code",
    "decode",
    "depolarizing_priors",
    "inner_product",
    "is_stabilizer_element",
    "syndrome",
]
