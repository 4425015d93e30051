"""
Which Pauli errors slip through?
================================

Every non-identity Pauli error on four qubits is applied to the coherent
encoding, and we count the keys under which the decoded state stays in
the accepted, correct subspace.
"""

import numpy as np

from uncloneable import trivial_config
from uncloneable.analysis import pauli_sweep

params = trivial_config()
sweep = pauli_sweep(params)
rows = sweep["rows"]
print(len(rows), "errors, tag bound", sweep["tag_bound"])

####################################################################
# The engine and the closed-form predictor agree on every error.

print(max(abs(r["handled_fraction"] - r["predicted_fraction"]) for r in rows))

####################################################################
# The weakest errors
# ------------------

for r in sorted(rows, key=lambda r: r["handled_fraction"])[:8]:
    print(f"{r['pauli']}  handled {r['handled_fraction']:.4f}  bound {r['bound']:.4f}")

####################################################################
# Distribution of handled fractions

values, counts = np.unique(np.round([r["handled_fraction"] for r in rows], 6),
                           return_counts=True)
for v, c in zip(values, counts):
    print(f"{v:.4f}: {c}")
