"""Rebuild the regression fixtures: ``python3 tests/data/regenerate.py``.

Only rerun after a deliberate change to the analysis engine; the tests
compare fresh computations against these files.
"""

import json
from pathlib import Path

from uncloneable.adversary import AncillaCopy, random_kraus_attack
from uncloneable.analysis import pauli_sweep, uncloneability_scan
from uncloneable.codes import even_weight_config, trivial_config

HERE = Path(__file__).parent
N_KRAUS = 20


def main():
    params = trivial_config()
    copy = uncloneability_scan(AncillaCopy(), params, 0, 1).as_dict()
    kraus = [uncloneability_scan(random_kraus_attack(params.N, seed), params, 0, 1).as_dict()
             for seed in range(N_KRAUS)]
    sweeps = {"trivial": pauli_sweep(params), "even_weight": pauli_sweep(even_weight_config())}
    for name, payload in [("copy_scan", copy), ("kraus_scans", kraus), ("sweeps", sweeps)]:
        (HERE / f"{name}.json").write_text(json.dumps(payload, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
