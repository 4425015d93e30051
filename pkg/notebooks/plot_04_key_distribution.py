"""
Key distribution over the encryption scheme
===========================================

Alice encrypts a fresh random string, and once Bob acknowledges it
she announces the key. A stolen transmission shows up as a rejection.
A sifted variant measures raw qubits in random bases first.
"""

import numpy as np

from uncloneable import trivial_config
from uncloneable.adversary import InterceptResendZ, Steal
from uncloneable.qkd import accepted_runs, run_direct, run_sifted

params = trivial_config()

t = run_direct(params, None, 1)
print(t.events)
print(t.bob_verdict, t.keys_match)

####################################################################
# Attacks
# -------

runs = [run_direct(params, InterceptResendZ(), seed) for seed in range(500)]
print("accepted under intercept-resend:", accepted_runs(runs), "of 500")
print("stolen:", run_direct(params, Steal(), 2).reason)

####################################################################
# Sifting
# -------
# Half of the raw qubits survive sifting. An intercept-resend attacker
# flips about a quarter of the survivors.

rng = np.random.default_rng(4)
honest = [run_sifted(params, None, rng, raw_qubits=64) for _ in range(300)]
attacked = [run_sifted(params, InterceptResendZ(), rng, raw_qubits=64) for _ in range(300)]
print(np.mean([r.sift["sift_fraction"] for r in honest]))
print(np.mean([r.sift["kept_error_rate"] for r in attacked]))
