"""Smoke test for the ncval_qrf_py extension.

Build with
    cargo build -p ncval-qrf-py --features extension-module --release
    cp target/release/libncval_qrf_py.so python/ncval_qrf_py.so
then run `python3 python/smoke_test.py`.
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import ncval_qrf_py as q  # noqa: E402


def close(a, b, tol=1e-12):
    return abs(a - b) < tol


def main():
    # sigma_z on (cos t, sin t): f = cos 2t, variance = sin^2 2t
    t = 0.3
    f, v, unc = q.ncvalue([[1, 0], [0, -1]], [math.cos(t), math.sin(t)])
    assert close(f.real, math.cos(2 * t)), f
    assert close(unc, math.sin(2 * t) ** 2), unc
    assert close(sum(abs(x) ** 2 for x in v), unc)

    assert q.factor_rank([1, 0, 0, 1], 2, 2) == 2
    assert q.factor_rank([1, 1, 1, 1], 2, 2) == 1

    u = q.qubit_unitary()
    for i in range(4):
        for j in range(4):
            dot = sum(u[k][i].conjugate() * u[k][j] for k in range(4))
            assert close(dot, 1.0 if i == j else 0.0), (i, j, dot)

    report = json.loads(q.run_qubit_case("c", theta=0.8, zeta=0.3))
    assert report["scenario_id"] == "qubit-c"
    assert all(c["pass"] for c in report["checks"])

    cfg = Path(__file__).resolve().parent.parent / "configs" / "grid_a.json"
    grid = json.loads(q.run_config(cfg.read_text()))
    assert all(c["pass"] for c in grid["checks"])

    summary, ok = q.verify("qubit")
    assert ok and json.loads(summary)["suite"] == "qubit"

    g = q.GridBasis(8, 0.5)
    assert g.n == 8 and len(g.labels()) == 8 and len(g.momenta()) == 8
    assert g.index_of(g.labels()[3]) == 3

    for bad in (lambda: q.run_config('{"system":"qubit"}'), lambda: q.verify("nope"), lambda: q.GridBasis(7)):
        try:
            bad()
        except ValueError as e:
            assert ":" in str(e)
        else:
            raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
