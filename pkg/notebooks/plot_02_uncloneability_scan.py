"""
How much does a copier learn, and does Bob notice?
==================================================

For every key of the smallest configuration, the scan reports Bob's
acceptance probability and how well Eve's leftover state separates two
messages once the key is revealed.
"""

import numpy as np

from uncloneable import trivial_config
from uncloneable.adversary import AncillaCopy, InterceptResendRandom, random_kraus_attack
from uncloneable.analysis import encryption_error, uncloneability_scan

params = trivial_config()

####################################################################
# Without any attack the ciphertext state does not depend on the
# message at all.

print(max(encryption_error(params, a, b) for a in range(4) for b in range(a + 1, 4)))

####################################################################
# A CNOT copier
# -------------
# Copying each qubit onto an ancilla is perfect when every basis bit
# is zero and undetected. With Hadamard bases in play Bob rejects
# a sizeable share of copies, though leaky keys are not always caught.

report = uncloneability_scan(AncillaCopy(), params, 0, 1)
d, p = report.distances, report.p_m
print("epsilon", report.epsilon_empirical, "key fraction", report.key_fraction)
for lo, hi in [(0, 0.25), (0.25, 0.5), (0.5, 1.01)]:
    sel = (d >= lo) & (d < hi)
    print(f"distance in [{lo}, {hi}): {sel.sum():4d} keys, mean acceptance {p[sel].mean():.3f}")

####################################################################
# Other attacks
# -------------

for attack in (InterceptResendRandom(), random_kraus_attack(4, 3)):
    rep = uncloneability_scan(attack, params, 0, 1)
    print(f"{attack.spec:>12}  epsilon {rep.epsilon_empirical:.4f}  "
          f"mean acceptance {rep.p_m.mean():.4f}")
