"""Edon-K key encapsulation mechanism and the attack that breaks it.

The attack entry point lives in the submodule: ``edonk.attack.attack``.
"""

from .attack import AttackFailure, AttackReport, ReconstructedCheck
from .gf2m import FieldContext, field
from .kem import (
    Ciphertext,
    DecapsulationFailure,
    PARAMETER_SETS,
    Params,
    PublicKey,
    SecretKey,
    decapsulate,
    encapsulate,
    keygen,
)

__all__ = [
    "AttackFailure",
    "AttackReport",
    "Ciphertext",
    "DecapsulationFailure",
    "FieldContext",
    "PARAMETER_SETS",
    "Params",
    "PublicKey",
    "ReconstructedCheck",
    "SecretKey",
    "decapsulate",
    "encapsulate",
    "field",
    "keygen",
]
