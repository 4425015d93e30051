"""
Why the key must look random
============================

With a badly periodic key stream, a fixed bit-flip pattern lines up
with the tag in a way an attacker can exploit. Against true randomness
the same attack rarely gets through.
"""

import numpy as np

from uncloneable.analysis import (KeySource, compare_sources, distinguisher_config,
                                  exploit_attack, exploit_messages)

params = distinguisher_config()
attack = exploit_attack(params)
print(params.n, params.s, params.N, attack.spec, exploit_messages(params))

####################################################################
# Two weak sources
# ----------------

for spec in ("block:1", "lfsr16"):
    out = compare_sources(attack, KeySource.parse(spec), 300, np.random.default_rng(0),
                          params=params)
    print(f"{spec:>8}  prg rate {out['prg']['rate']:.3f}  "
          f"random rate {out['random']['rate']:.3f}  advantage {out['advantage']:.3f}")
