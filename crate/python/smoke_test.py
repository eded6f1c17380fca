#!/usr/bin/env python3
"""Smoke test for the ferisk_py extension module.

Builds the cdylib if it is missing, loads it under the import name Python
expects, and checks a handful of frozen values end to end. Run from anywhere;
paths resolve relative to the repository root.
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    lib = ROOT / "target" / "debug" / "libferisk_py.so"
    if not lib.exists():
        subprocess.run(["cargo", "build", "-p", "ferisk-py"], cwd=ROOT, check=True)
    staging = Path(tempfile.mkdtemp(prefix="ferisk_py_"))
    shutil.copy2(lib, staging / "ferisk_py.so")
    sys.path.insert(0, str(staging))
    import ferisk_py

    return ferisk_py


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    fp = load_module()

    # Entropy values frozen against the library's own test suite.
    approx(fp.fractional_entropy([0.5, 0.5], 0.5), 0.8325546111576977)
    approx(fp.normalized_fractional_entropy([0.5, 0.5], 0.5), 0.9706104742283898)
    approx(fp.entropy_term_max(0.5), math.sqrt(0.5) * math.exp(-0.5))
    approx(fp.information_gain(0.5, 1.0), math.log(2))
    approx(fp.utility(0.1), math.log(1.1))

    # Prospect plumbing.
    p = fp.Prospect("a1", [(0.05, 1.0)])
    assert p.label == "a1"
    approx(p.expected_utility(), math.log(1.05))
    m = p.moments()
    approx(m["mean"], 0.05)
    approx(m["variance"], 0.0)
    approx(p.translate(0.01).expected_utility(), math.log(1.06))

    # Risk scoring on the frozen two-action fixture.
    a1 = fp.Prospect("a1", [(0.05, 1.0)])
    a2 = fp.Prospect("a2", [(0.1, 0.5), (0.0, 0.5)])
    rows = fp.rank([a1, a2], measure="neu-fe", lam=0.5, q=0.5)
    assert [r[1] for r in rows] == ["a1", "a2"], rows
    approx(rows[0][2], -0.5)
    approx(rows[1][2], -0.003062559073907234)
    s = fp.score(a2, [a1, a2], measure="neu-fe", lam=0.5, q=0.5)
    approx(s["total"], -0.003062559073907234)

    # A small end-to-end ranking on synthetic data.
    prospects = fp.synth_prospects(7, tickers=12, days=120)
    ranked = fp.rank(prospects, bins=15)
    assert len(ranked) == 12
    assert ranked[0][0] == 1
    totals = [r[2] for r in ranked]
    assert totals == sorted(totals)

    # Diagnostics.
    assert 0.0 < fp.scaling_lambda_bound(a2, 2.0) < 1.0
    approx(fp.target_shift(0.01, 0.5, 2.0), 0.5 / (2 * 2.0) * 0.01)
    series = [math.sin(0.7 * i) for i in range(100)]
    assert fp.sample_variance_variance(series) > 0.0

    # Binning: four returns spread over four cells.
    binned = fp.bin_prospect("t", [0.005, 0.015, 0.025, 0.035], 0.0, 0.04, 4)
    assert [round(pr, 10) for pr in binned.probs] == [0.25, 0.25, 0.25, 0.25]

    # Domain errors surface as ValueError.
    try:
        fp.fractional_entropy([0.5, 0.6], 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("an invalid distribution should raise ValueError")

    print("ferisk_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
