"""Smoke test for the permoment extension module.

Build and run from the repository root:

    cargo build -p permoment-python --features extension-module
    cp target/debug/libpermoment_py.so /tmp/permoment.so
    PYTHONPATH=/tmp python3 crates/python/python/smoke_test.py

or `maturin develop -m crates/python/Cargo.toml` followed by the last line.
"""

import math
import random

import permoment


def check_small_example():
    data = permoment.Dataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    mv = permoment.moments(data, k=4)
    assert mv.n == 3 and mv.mode == "pearson"
    assert math.isclose(mv[2], 0.5) and math.isclose(mv[4], 0.375)
    assert mv.methods[1] == "closed-form"

    exact = permoment.pvalue(data, method="exact")
    assert math.isclose(exact.p, 1 / 3), exact
    assert exact.k is None

    approx = permoment.pvalue(data, method="hausdorff", k=6)
    assert approx.k == 6 and "shape_correction" in approx.diagnostics


def check_against_enumeration():
    rng = random.Random(5)
    x = [rng.random() for _ in range(7)]
    y = [rng.random() for _ in range(7)]
    data = permoment.Dataset(x, y)
    fast = permoment.moments(data, k=8).values
    slow = permoment.oracle_moments(data, k=8).values
    for a, b in zip(fast, slow):
        assert abs(a - b) <= 1e-10 * max(abs(b), 1e-6), (a, b)

    cdf = permoment.reconstruct_cdf(data, k=10)
    assert cdf.cdf(-1.0) <= 1e-9 and abs(cdf.cdf(1.0) - 1.0) <= 1e-9
    assert cdf.correction < 0.05


def check_spearman_and_errors():
    a = permoment.Dataset([1, 2, 3, 4, 5], [4, 9, 1, 7, 3])
    b = permoment.Dataset([0.1, 7, -2, 3.5, 9], [-3, 2, 8, 100, 0])
    assert permoment.moments(a, mode="spearman").values == permoment.moments(b, mode="spearman").values

    for bad in (lambda: permoment.Dataset([1.0], [2.0]),
                lambda: permoment.moments(permoment.Dataset([1, 1, 1], [1, 2, 3])),
                lambda: permoment.pvalue(a, method="nope")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        permoment.Dataset.from_csv("/nonexistent.csv")
    except OSError:
        pass
    else:
        raise AssertionError("expected OSError")


if __name__ == "__main__":
    check_small_example()
    check_against_enumeration()
    check_spearman_and_errors()
    print("python smoke test ok")
