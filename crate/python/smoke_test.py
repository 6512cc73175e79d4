"""Smoke test for the dcbo_py extension module.

Build and install the module first, e.g. ``maturin develop -m crates/python/Cargo.toml``,
or copy ``target/release/libdcbo_py.so`` next to this script as ``dcbo_py.so``.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dcbo_py  # noqa: E402


def main():
    assert "mystery" in dcbo_py.Problem.names()
    assert "dckg" in dcbo_py.POLICIES

    p = dcbo_py.Problem("mystery", costs=[5.0, 1.0])
    assert p.dim == 2 and p.num_tasks == 2
    assert p.costs == [5.0, 1.0]
    value, x_star = p.optimum
    assert abs(p.evaluate(0, x_star) - value) < 1e-9
    try:
        p.evaluate(0, [99.0, 99.0])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-box evaluation should fail")

    lower, upper = p.bounds
    xs = [[lower[0] + (upper[0] - lower[0]) * i / 7, lower[1] + (upper[1] - lower[1]) * ((3 * i) % 8) / 7] for i in range(8)]
    fy = [p.evaluate(0, x) for x in xs]
    cy = [p.evaluate(1, x) for x in xs]
    f_gp = dcbo_py.GaussianProcess.fit(xs, fy, lower, upper, seed=1)
    c_gp = dcbo_py.GaussianProcess.fit(xs, cy, lower, upper, seed=2)
    mean, var = f_gp.posterior(xs[3])
    assert abs(mean - fy[3]) < 1e-2 * max(1.0, abs(fy[3])) and var >= 0.0

    q = [2.5, 2.5]
    total = dcbo_py.ckg(f_gp, [c_gp], lower, upper, q, xs[0], penalty=min(fy))
    assert total >= -1e-9
    for task, cost in enumerate(p.costs):
        v = dcbo_py.dckg(f_gp, [c_gp], lower, upper, q, task, xs[0], cost=cost, penalty=min(fy))
        assert v >= -1e-9

    steps = dcbo_py.run(p, "dckg", 10.0, seed=3)
    assert steps[0]["step"] == 0 and steps[0]["location"] is None
    assert steps[-1]["spent"] <= 6 * 6.0 + 10.0 + 1e-9
    assert all(math.isfinite(s["oc"]) for s in steps)

    cert_value, _ = dcbo_py.certify("testfn2", 400)
    assert abs(cert_value - dcbo_py.Problem("testfn2").optimum[0]) < 1e-6
    print(f"ok: {len(steps)} steps, final OC {steps[-1]['oc']:.4f}, ckg {total:.4g}")


if __name__ == "__main__":
    main()
