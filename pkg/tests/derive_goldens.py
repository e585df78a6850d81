"""Freeze naive-oracle counts into tests/data/goldens.json.

Run once with ``python3 tests/derive_goldens.py``; the tests compare the fast
enumerator against the frozen values and re-run the oracle live for small n.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from oracles import naive_bridges, naive_count  # noqa: E402

from extsaw.graphs import get_family  # noqa: E402

N_MAX = 10
FAMILIES = ["square", "cubic", "triangular", "ladder", "decorated-square",
            "oriented-ladder", "grandparent", "tree3", "tree4"]


def main():
    out = {"n_max": N_MAX, "sigma": {}, "bridges": {}}
    for name in FAMILIES:
        g = get_family(name)
        out["sigma"][name] = {
            repr(s): [naive_count(g, s, n) for n in range(N_MAX + 1)] for s in g.representatives
        }
        print(name, out["sigma"][name], flush=True)
    out["bridges"]["2"] = [naive_bridges(2, n) for n in range(13)]
    out["bridges"]["3"] = [naive_bridges(3, n) for n in range(8)]
    path = Path(__file__).parent / "data" / "goldens.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
