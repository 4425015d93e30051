"""Uncloneable encryption of classical messages into BB84 states.

Keyed prepare-and-measure encryption with a polynomial tag and a nested pair
of binary codes, a small exact/sampled qubit simulator, eavesdropper models,
exact analysis of copying attacks, and key distribution built on top.
"""

__version__ = "0.1.0"

from .errors import (CapabilityError, InvariantError, ParameterError,  # noqa: E402
                     SearchExhaustedError, UncloneableError, UsageError)
from .field import FieldParams, default_field  # noqa: E402
from .tag import TaggedMessage, append_tag, verify_tag  # noqa: E402
from .codes import (BinaryLinearCode, NestedCodePair, ProtocolParams,  # noqa: E402
                    hamming_config, protocol_params, size_parameters, trivial_config)
from .protocol import (ACC, REJ, KeyMaterial, ReusableKeySchedule,  # noqa: E402
                       decrypt, decrypt_reusable, encrypt, encrypt_reusable, key_accounting)
from .adversary import apply_attack, attack_battery, parse_attack  # noqa: E402
from .analysis import (acceptance_probability, encryption_error, pauli_sweep,  # noqa: E402
                       uncloneability_scan)
from .qkd import run_direct, run_sifted  # noqa: E402

__all__ = [
    "ACC", "REJ", "BinaryLinearCode", "CapabilityError", "FieldParams", "InvariantError",
    "KeyMaterial", "NestedCodePair", "ParameterError", "ProtocolParams", "ReusableKeySchedule",
    "SearchExhaustedError", "TaggedMessage", "UncloneableError", "UsageError",
    "acceptance_probability", "append_tag", "apply_attack", "attack_battery", "decrypt",
    "decrypt_reusable", "default_field", "encrypt", "encrypt_reusable", "encryption_error",
    "hamming_config", "key_accounting", "parse_attack", "pauli_sweep", "protocol_params",
    "run_direct", "run_sifted", "size_parameters", "trivial_config", "uncloneability_scan",
    "verify_tag",
]
