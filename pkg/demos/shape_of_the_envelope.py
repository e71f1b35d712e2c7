"""How the specular geometry shapes the envelope density.

Three rays carry 10 dB more power than the diffuse part. The script
evaluates the Laguerre series for the three magnitude shapes of the
first figure preset, checks it against the closed-form evaluator, counts
the local maxima and then raises K until a second maximum shows up.

Run: python demos/shape_of_the_envelope.py
"""

import math

import numpy as np

from fadinglab import ChannelModel, auto_truncate, count_modes, envelope_pdf_psi2, envelope_pdf_series, solve_magnitudes
from fadinglab.presets import SHAPES


def modes(model, r):
    return count_modes(envelope_pdf_psi2(model, r))


def main():
    print(f"{'shape':>12} {'order M':>8} {'max |series - psi2|':>20} {'maxima':>7}")
    for name, shape in SHAPES.items():
        model = ChannelModel.mwgd(solve_magnitudes(10.0, shape))
        series = auto_truncate(model, 1e-8)
        r = np.linspace(0.0, 5.0 * math.sqrt(model.total_power), 400)
        gap = np.max(np.abs(envelope_pdf_series(series, r) - envelope_pdf_psi2(model, r)))
        print(f"{name:>12} {series.truncation_order:>8} {gap:>20.2e} {modes(model, r):>7}")

    # the onset of bimodality for the 1 : 1/2 : 1/3 shape
    shape = SHAPES["v1=2v2=3v3"]
    for k_db in np.arange(14.0, 26.0, 1.5):
        model = ChannelModel.mwgd(solve_magnitudes(k_db, shape))
        r = np.linspace(1e-3, 6.0 * math.sqrt(model.total_power), 1201)
        n = modes(model, r)
        print(f"K = {k_db:4.1f} dB: {n} maxima")
        if n > 1:
            break


if __name__ == "__main__":
    main()
