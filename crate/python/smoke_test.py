"""Smoke test for the idnc Python extension.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run:
    python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

import idnc


def main():
    src = [
        idnc.SourceSpec("gaussian", 10.0, 1.5, power=10 ** 0.5, nc_phase_deg=60.0),
        idnc.SourceSpec("gaussian", 30.0, 3.0, power=10 ** 0.5, nc_phase_deg=45.0),
    ]
    sc = idnc.Scenario(src, snapshots=1000)
    print(sc.sources[0])

    r = sc.theoretical_cov()
    assert len(r) == 12 and len(r[0]) == 12
    assert abs(r[0][0].imag) < 1e-12
    assert all(abs(r[i][j] - r[j][i].conjugate()) < 1e-12 for i in range(12) for j in range(12))

    est = sc.simulate(seed=3)
    est.sort(key=lambda e: e.doa_deg)
    print(est)
    assert abs(est[0].doa_deg - 10.0) < 1.0
    assert abs(est[1].doa_deg - 30.0) < 1.5

    x = sc.synthesize(seed=4)
    again = idnc.estimate_sources(x, 2)
    assert len(again) == 2

    bounds = sc.crlb_std_deg()
    circ = sc.crlb_std_deg("circular")
    assert all(b[0] <= c[0] for b, c in zip(bounds, circ))
    print("sqrt CRLB (deg):", bounds)

    pred = sc.predicted_rmse_deg(0)
    assert all(math.isfinite(v) and v > 0 for v in pred)
    print("predicted RMSE source 1 (deg):", pred)

    assert abs(idnc.cos_moment("gaussian", 0.0, 0.1) - 1.0) < 1e-15

    try:
        idnc.SourceSpec("cauchy", 0.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    cfg = os.path.join(os.path.dirname(__file__), "..", "configs", "crlb_vs_gamma_sep8.toml")
    with tempfile.TemporaryDirectory() as d:
        out = idnc.bounds_config(cfg, out_dir=d)
        svg = os.path.join(d, "ratio.svg")
        idnc.plot_csv(out, "ratio", svg)
        assert os.path.getsize(svg) > 0

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
