"""Fluctuating specular rays: from MWGD to heavy shadowing.

All specular amplitudes share one Gamma fluctuation of shape m_s. The
script traces one figure preset from m_s = 1e4 (practically MWGD) down
to m_s = 3, printing the density near its peak, the amount of fading and
the series order, and cross-checks one density value against the direct
numerical integral over the fluctuation.

Run: python demos/shadowed_rays.py
"""

import math

import numpy as np

from fadinglab import (
    ChannelModel,
    amount_of_fading,
    auto_truncate,
    count_modes,
    envelope_pdf_series,
    fmr_envelope_pdf_integral,
)
from fadinglab.presets import FMR_SHAPES, figure


def main():
    fig = figure("fig2a")
    base = fig.curves[0].model
    mwgd = auto_truncate(ChannelModel.mwgd(base.specular, base.m, base.omega), 1e-8)
    r = np.linspace(0.0, 6.0 * math.sqrt(base.total_power), 1201)
    f0 = envelope_pdf_series(mwgd, r)
    print(f"MWGD reference: peak {f0.max():.4f} at r = {r[f0.argmax()]:.3f}, AF {amount_of_fading(mwgd):.4f}\n")
    print(f"{'m_s':>7} {'order':>6} {'peak':>8} {'r_peak':>7} {'AF':>8} {'maxima':>7} {'max |f - f_MWGD|':>17}")
    for m_s in FMR_SHAPES:
        model = fig.curve(f"ms={m_s:g}").model
        s = auto_truncate(model, 1e-8)
        f = envelope_pdf_series(s, r)
        print(
            f"{m_s:>7g} {s.truncation_order:>6} {f.max():>8.4f} {r[f.argmax()]:>7.3f} "
            f"{amount_of_fading(s):>8.4f} {count_modes(f):>7} {np.max(np.abs(f - f0)):>17.2e}"
        )

    model = fig.curve("ms=3").model
    s = auto_truncate(model, 1e-8)
    x = 2.0
    print(f"\nm_s = 3 at r = {x}: series {float(envelope_pdf_series(s, x)):.8f}, "
          f"integral {float(fmr_envelope_pdf_integral(model, x)):.8f}")


if __name__ == "__main__":
    main()
