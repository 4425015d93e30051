"""
Encrypting a short message into qubits
======================================

A walk through one encryption and decryption on the smallest
configuration: four qubits carrying a two-bit message and a two-bit tag.
"""

import numpy as np

from uncloneable import (KeyMaterial, decrypt, encrypt, key_accounting, trivial_config)
from uncloneable.adversary import InterceptResendZ, apply_attack

rng = np.random.default_rng(7)
params = trivial_config()
print(params.n, params.s, params.N)

####################################################################
# Key material
# ------------
# A one-time key holds the tag key, the pad for message and tag, the
# code syndrome (empty here, since the outer code is the whole space)
# and one basis bit per qubit.

key = KeyMaterial.generate(params, rng)
print(key)
print(key_accounting(params).as_dict())

####################################################################
# Round trip
# ----------
# Without interference Bob measures in the key's bases, strips the pad
# and checks the tag.

message = np.array([1, 0], dtype=np.uint8)
tx = encrypt(message, key, params, rng)
result = decrypt(tx, key, params, rng)
print(result.verdict, result.message)

####################################################################
# An eavesdropper who measures everything in the computational basis
# ------------------------------------------------------------------
# Qubits sent in the Hadamard basis get randomised, so the tag check
# fails often. Repeating with fresh keys estimates how often.

caught = 0
for _ in range(2000):
    key = KeyMaterial.generate(params, rng)
    tx = encrypt(message, key, params, rng)
    outcome = apply_attack(InterceptResendZ(), tx, rng)
    caught += not decrypt(outcome.to_bob, key, params, rng).accepted
print(f"rejected {caught / 2000:.3f} of intercepted transmissions")
