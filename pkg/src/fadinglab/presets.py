"""Parameter presets reproducing the published figure set.

Every preset uses N specular rays with power ratio K^(N) (dB), m = Omega = 1
unless stated. A figure is a list of labelled curves sharing one grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import ChannelModel, solve_magnitudes

__all__ = ["Curve", "Figure", "FIGURES", "figure", "figure_names", "SHAPES"]

SHAPES = {
    "equal": (1.0, 1.0, 1.0),
    "v1=2v2=3v3": (1.0, 1.0 / 2.0, 1.0 / 3.0),
    "v1=3v2=3v3": (1.0, 1.0 / 3.0, 1.0 / 3.0),
}

# Fluctuation shapes of the FMR figures, from nearly deterministic down to 3.
FMR_SHAPES = (1e4, 30.0, 10.0, 3.0)


@dataclass(frozen=True)
class Curve:
    label: str
    model: ChannelModel
    gamma_bar_db: float | None = None


@dataclass(frozen=True)
class Figure:
    """A figure panel: what is plotted, over which grid, for which curves.

    Attributes
    ----------
    meaning : str
        ``envelope_pdf``, ``envelope_cdf``, ``mgf`` or ``capacity``.
    grid : tuple
        (start, stop, count); r for envelope curves, s for the MGF and
        the average SNR in dB for capacity.
    """

    name: str
    meaning: str
    grid: tuple
    curves: tuple

    def grid_values(self) -> np.ndarray:
        a, b, n = self.grid
        return np.linspace(a, b, int(n))

    def curve(self, label: str) -> Curve:
        for c in self.curves:
            if c.label == label:
                return c
        raise ParameterError(f"figure {self.name} has no curve {label!r}")


def _mwgd(shape, k_db=10.0):
    return ChannelModel.mwgd(solve_magnitudes(k_db, shape))


def _fmr(shape, m_s, k_db=10.0):
    return ChannelModel.fmr(solve_magnitudes(k_db, shape), m_s)


def _label_ms(m_s):
    return f"ms={m_s:g}"


_R_GRID = (0.0, 8.0, 201)


def _build():
    figs = {}
    shape_curves = tuple(Curve(k, _mwgd(v)) for k, v in SHAPES.items())
    figs["fig1a"] = Figure("fig1a", "envelope_pdf", _R_GRID, shape_curves)
    figs["fig1b"] = Figure("fig1b", "envelope_cdf", _R_GRID, shape_curves)
    k_curves = tuple(Curve(f"k={k:g}dB", _mwgd(SHAPES["equal"], k)) for k in (0.0, 5.0, 10.0, 15.0))
    figs["fig1c"] = Figure("fig1c", "envelope_pdf", (0.0, 12.0, 241), k_curves)
    figs["fig1d"] = Figure("fig1d", "envelope_cdf", (0.0, 12.0, 241), k_curves)
    for panel, shape in (("a", "v1=2v2=3v3"), ("c", "v1=3v2=3v3")):
        curves = tuple(Curve(_label_ms(ms), _fmr(SHAPES[shape], ms)) for ms in FMR_SHAPES)
        figs[f"fig2{panel}"] = Figure(f"fig2{panel}", "envelope_pdf", _R_GRID, curves)
        nxt = chr(ord(panel) + 1)
        figs[f"fig2{nxt}"] = Figure(f"fig2{nxt}", "envelope_cdf", _R_GRID, curves)
    n_curves = tuple(Curve(f"n={n}", _mwgd(tuple(1.0 / i for i in range(1, n + 1)))) for n in (1, 2, 3, 4, 6, 8))
    figs["fig3a"] = Figure("fig3a", "envelope_pdf", _R_GRID, n_curves)
    figs["fig3b"] = Figure("fig3b", "envelope_cdf", _R_GRID, n_curves)
    eq = _mwgd(SHAPES["equal"])
    figs["fig3c"] = Figure(
        "fig3c", "mgf", (0.0, 2.0, 101), tuple(Curve(f"snr={g:g}dB", eq, g) for g in (0.0, 5.0, 10.0))
    )
    figs["fig3d"] = Figure("fig3d", "capacity", (-10.0, 30.0, 41), shape_curves)
    return figs


FIGURES = _build()


def figure_names() -> list:
    """Figure names and single-curve names (``<figure>-<label>``)."""
    names = []
    for f in FIGURES.values():
        names.append(f.name)
        names.extend(f"{f.name}-{c.label}" for c in f.curves)
    return names


def figure(name: str) -> Figure:
    """Look up a figure, or a single curve of it as ``fig1a-equal``."""
    if name in FIGURES:
        return FIGURES[name]
    base, _, label = name.partition("-")
    if base in FIGURES and label:
        fig = FIGURES[base]
        return Figure(name, fig.meaning, fig.grid, (fig.curve(label),))
    raise ParameterError(f"unknown figure preset {name!r}; choose from {', '.join(sorted(FIGURES))}")
