"""Smoke test for the eigenprep_py extension.

Build and install it first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import cmath
import json
import math

import eigenprep_py as ep


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    n = 64
    values, vectors = ep.eigensolve("zero", n, 3)
    h = 1.0 / (n + 1)
    for k, value in enumerate(values, start=1):
        close(value, 4 / h**2 * math.sin(k * math.pi * h / 2) ** 2, 1e-10 * value)
    assert len(vectors[0]) == n

    for got, want in zip(ep.replicate([1, 0], 1), [2**-0.5, 2**-0.5, 0, 0]):
        close(got, want, 1e-15)

    report = ep.overlap_analysis("quad:100", 0, 16, 2)
    assert report.failure <= report.error_norm**2 + 1e-12
    close(sum(abs(c) ** 2 for c in report.coefficients), 1.0, 1e-10)

    phases = [0.1, 0.37, 0.8]
    amps = [complex(0.6, 0), complex(0, 0.6), complex(0.52915026221291817, 0)]
    analytic = ep.outcome_distribution(phases, amps, 5)
    simulated = ep.statevector_distribution(phases, amps, 5)
    assert max(abs(a - s) for a, s in zip(analytic, simulated)) <= 1e-9
    close(sum(abs(ep.g_kernel(0.3, j, 6)) ** 2 for j in range(64)), 1.0, 1e-10)

    post = ep.collapse([0.25, 0.5], [cmath.sqrt(0.5), cmath.sqrt(0.5)], 2, 1)
    close(abs(post[0]) ** 2, 1.0, 1e-12)

    assert ep.choose_b(4, 0.25) == 6
    close(ep.wrap_distance(0.9, 0.1), 0.2, 1e-15)

    counts = ep.sample_outcomes(analytic, 1000, 7)
    assert sum(counts) == 1000 and counts == ep.sample_outcomes(analytic, 1000, 7)

    config = ep.ExperimentConfig([8, 16, 32], potential="zero", fine_n=256)
    sweep = json.loads(ep.sweep_and_fit(config))
    assert sweep["fit"]["slope"] <= -1.7
    run = json.loads(ep.run_pipeline(ep.ExperimentConfig([32], s=5, shots=2000, seed=1)))
    assert run["records"][0]["shots"]["within_margin"]

    try:
        ep.ExperimentConfig([8], s=1, k=9)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid k accepted")

    assert all(passed for _, passed, _ in ep.check(1))
    print("smoke ok")


if __name__ == "__main__":
    main()
