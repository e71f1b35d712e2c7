"""Envelope and SNR distribution functions.

Two evaluators are provided. The Laguerre series works for every model
and any real m; it is the primary one. The closed form through Psi_2 (and,
for FMR, a Hankel-transform integral) serves as an independent reference.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import jn_zeros

from .errors import NumericalError, ParameterError, UnsupportedPathError
from .model import ChannelModel, Kind, SnrContext
from .series import LaguerreSeries
from .specfun import (
    QuadratureRule,
    bessel_j0,
    hyp1f1_neg,
    laguerre_sum,
    lower_incomplete_gamma,
    psi2,
    resolving_rule,
)

__all__ = [
    "EvaluatedCurve",
    "envelope_pdf_series",
    "envelope_cdf_series",
    "snr_pdf_series",
    "snr_cdf_series",
    "envelope_pdf_psi2",
    "envelope_cdf_psi2",
    "fmr_envelope_pdf_integral",
    "evaluate_curve",
    "count_modes",
]

MEANINGS = ("envelope_pdf", "envelope_cdf", "snr_pdf", "snr_cdf")
METHODS = ("series", "psi2_closed_form", "integral")


@dataclass
class EvaluatedCurve:
    """A distribution function sampled on a grid.

    Attributes
    ----------
    grid, values : ndarray
    meaning : str
        One of envelope_pdf, envelope_cdf, snr_pdf, snr_cdf.
    method : str
        series, psi2_closed_form or integral.
    diagnostics : dict
        ``clamped`` counts values in [-1e-9, 0) set to zero;
        ``negative`` counts values below -1e-9 left untouched.
    """

    grid: np.ndarray
    values: np.ndarray
    meaning: str
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.meaning not in MEANINGS or self.method not in METHODS:
            raise ParameterError("unknown curve meaning or method")
        if len(self.grid) != len(self.values):
            raise ParameterError("grid and values differ in length")
        if np.any(np.diff(self.grid) <= 0):
            raise ParameterError("grid must be strictly increasing")

    def to_csv(self) -> str:
        """CSV text with header ``x,value``, 17 significant digits and LF endings."""
        buf = io.StringIO(newline="")
        buf.write("x,value\n")
        for x, v in zip(self.grid, self.values):
            buf.write(f"{x:.17g},{v:.17g}\n")
        return buf.getvalue()


# ------------------------------------------------------------------ series


def _scalar(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ParameterError("distribution arguments must be nonnegative")
    return arr, arr.ndim == 0


def _density(coeffs, y):
    """e^{-y} sum C_n L_n(y), computed with damped recurrence values."""
    return np.exp(-y / 2.0) * laguerre_sum(coeffs, y)


def _cdf_stable(coeffs, y):
    """sum_n C_n int_0^y e^{-t} L_n(t) dt.

    Uses int_0^y e^{-t} L_n = (y/n) e^{-y} L^{(1)}_{n-1}(y) for n >= 1.
    """
    c = np.asarray(coeffs, dtype=float)
    out = -c[0] * np.expm1(-y)
    if len(c) > 1:
        n = np.arange(1, len(c))
        out = out + y * np.exp(-y / 2.0) * laguerre_sum(c[1:] / n, y, beta=1.0)
    return out


def _cdf_double_sum(coeffs, y):
    """sum_n C_n sum_k (-1)^k / k! binom(n, k) gamma(k+1, y), term by term.

    Kept for cross-checks at low order; the alternating inner sum loses
    accuracy quickly as n grows.
    """
    yv = np.atleast_1d(y)
    out = np.zeros_like(yv)
    for j, yy in enumerate(yv):
        g = [lower_incomplete_gamma(k + 1, yy) / math.factorial(k) for k in range(len(coeffs))]
        total = []
        for n, cn in enumerate(coeffs):
            inner = math.fsum((-1) ** k * math.comb(n, k) * g[k] for k in range(n + 1))
            total.append(cn * inner)
        out[j] = math.fsum(total)
    return out if np.ndim(y) else float(out[0])


def envelope_pdf_series(series: LaguerreSeries, r):
    """Envelope density 2 eps r e^{-eps r^2} sum C_n L_n(eps r^2).

    Parameters
    ----------
    series : LaguerreSeries
    r : float or array_like
        Nonnegative envelope values.
    """
    arr, scalar = _scalar(r)
    y = series.epsilon * arr * arr
    out = 2.0 * series.epsilon * arr * _density(series.coeffs, y)
    return float(out) if scalar else out


def envelope_cdf_series(series: LaguerreSeries, t, *, verbatim: bool = False):
    """Envelope CDF from the series.

    The default evaluates sum_n C_n int_0^{eps t^2} e^{-u} L_n(u) du in the
    closed form (y/n) e^{-y} L^{(1)}_{n-1}(y), which is the same quantity as
    the double sum over incomplete gamma functions without its cancellation.
    ``verbatim=True`` evaluates that double sum literally.
    """
    arr, scalar = _scalar(t)
    y = series.epsilon * arr * arr
    out = _cdf_double_sum(series.coeffs, y) if verbatim else _cdf_stable(series.coeffs, y)
    return float(out) if scalar else np.asarray(out)


def snr_pdf_series(series: LaguerreSeries, ctx: SnrContext, x):
    """SNR density (1/gbar) e^{-x/gbar} sum C_n L_n(x/gbar)."""
    arr, scalar = _scalar(x)
    y = arr / ctx.gamma_bar
    out = _density(series.coeffs, y) / ctx.gamma_bar
    return float(out) if scalar else out


def snr_cdf_series(series: LaguerreSeries, ctx: SnrContext, x, *, verbatim: bool = False):
    """SNR CDF, the envelope CDF evaluated at sqrt(x / gamma0)."""
    arr, scalar = _scalar(x)
    y = arr / ctx.gamma_bar
    out = _cdf_double_sum(series.coeffs, y) if verbatim else _cdf_stable(series.coeffs, y)
    return float(out) if scalar else np.asarray(out)


# ------------------------------------------------------------ closed form


def _require_closed_form(model: ChannelModel):
    if model.kind is not Kind.MWGD:
        raise UnsupportedPathError("the Psi_2 closed form covers MWGD only; use the series or the FMR integral")
    if not model.integer_m:
        raise UnsupportedPathError("the Psi_2 closed form needs integer m; use the series evaluator")


def _closed_form_sum(model, r, rule, last_b):
    m = int(model.m)
    scale = m / model.omega
    alphas = [v * v * scale for v in model.specular] + [r * r * scale]
    b = [1] * len(model.specular) + [last_b]
    if rule is None:
        x_eff = scale * (sum(model.specular) + r) ** 2
        rule = resolving_rule(x_eff, float(m))
    return math.fsum(
        math.comb(m - 1, k) * (-1) ** k * psi2(k + 1, b, alphas, rule) for k in range(m)
    )


def envelope_pdf_psi2(model: ChannelModel, r, rule: QuadratureRule | None = None):
    """Envelope density from the Psi_2 closed form (MWGD, integer m).

    f_R(r) = (2m/Omega) r sum_k binom(m-1, k) (-1)^k Psi_2(k+1; [1]_{N+1}; alpha(r))
    with alpha(r) = (V_1^2 m/Omega, ..., V_N^2 m/Omega, r^2 m/Omega).

    Parameters
    ----------
    model : ChannelModel
    r : float or array_like
    rule : QuadratureRule, optional
        Fixed rule for every point. By default a rule resolving the Bessel
        product at each r is chosen (see `specfun.resolving_rule`).

    Raises
    ------
    UnsupportedPathError
        FMR model or non-integer m.
    """
    _require_closed_form(model)
    arr, scalar = _scalar(r)
    flat = arr.ravel()
    out = np.array([
        2.0 * model.m / model.omega * rv * _closed_form_sum(model, rv, rule, 1) for rv in flat
    ]).reshape(arr.shape)
    return float(out) if scalar else out


def envelope_cdf_psi2(model: ChannelModel, t, rule: QuadratureRule | None = None):
    """Envelope CDF from the closed form, (m/Omega) t^2 sum_k binom(m-1,k)(-1)^k Psi_2(k+1; [1]_N, 2; alpha(t)).

    The last factor of the Psi_2 integrand is J1(2 sqrt(a u)) / sqrt(a u).
    """
    _require_closed_form(model)
    arr, scalar = _scalar(t)
    flat = arr.ravel()
    out = np.array([
        model.m / model.omega * tv * tv * _closed_form_sum(model, tv, rule, 2) for tv in flat
    ]).reshape(arr.shape)
    return float(out) if scalar else out


# ---------------------------------------------------------- FMR integral


@lru_cache(maxsize=4)
def _j0_zeros(n):
    return jn_zeros(0, n)


def _wynn(partials):
    """Wynn epsilon acceleration of a sequence of partial sums (last estimate)."""
    s = list(partials)
    n = len(s)
    if n < 3:
        return s[-1]
    e_prev = [0.0] * (n + 1)
    e_cur = s[:]
    best = s[-1]
    for k in range(1, n):
        e_next = []
        for i in range(len(e_cur) - 1):
            d = e_cur[i + 1] - e_cur[i]
            if d == 0:
                return e_cur[i + 1] if k % 2 == 1 else best
            e_next.append(e_prev[i + 1] + 1.0 / d)
        e_prev, e_cur = e_cur, e_next
        if k % 2 == 0 and e_cur:
            best = e_cur[-1]
    return best


class _FmrIntegrand:
    """nu J0(r nu) 1F1(m;1;-Omega nu^2/4m) Psi_2(m_s; [1]_N; V^2 nu^2 / 4 m_s)."""

    def __init__(self, model: ChannelModel, r: float, inner: QuadratureRule | None):
        self.model = model
        self.r = r
        self.inner = inner
        self.vsum = sum(model.specular)

    def _inner_rule(self, nu_max):
        if self.inner is not None:
            return self.inner
        x_eff = (self.vsum * nu_max) ** 2 / (4.0 * self.model.m_s)
        return resolving_rule(x_eff, self.model.m_s)

    def __call__(self, nu, nu_max):
        md = self.model
        y = md.omega * nu * nu / (4.0 * md.m)
        diffuse = hyp1f1_neg(md.m, y)
        rule = self._inner_rule(nu_max)
        t = rule.nodes
        if rule.alpha == 0.0:
            w = np.exp(rule.log_weights + (md.m_s - 1.0) * np.log(t) - math.lgamma(md.m_s))
        else:
            w = rule.weights
        prod = np.ones((len(nu), len(t)))
        for v in md.specular:
            if v > 0:
                prod *= bessel_j0(v * nu[:, None] * np.sqrt(t[None, :] / md.m_s))
        spec = prod @ w
        return nu * bessel_j0(self.r * nu) * diffuse * spec


def _panel(f, a, b, depth=0):
    gx, gw = np.polynomial.legendre.leggauss(24)
    gx2, gw2 = np.polynomial.legendre.leggauss(48)
    h = (b - a) / 2.0
    c = (a + b) / 2.0
    one = h * np.dot(gw, f(c + h * gx, b))
    two = h * np.dot(gw2, f(c + h * gx2, b))
    if abs(one - two) <= 1e-14 + 1e-12 * abs(two) or depth >= 6:
        return two
    return _panel(f, a, c, depth + 1) + _panel(f, c, b, depth + 1)


def fmr_envelope_pdf_integral(
    model: ChannelModel,
    r,
    rule: QuadratureRule | None = None,
    *,
    max_panels: int = 4000,
    diagnostics: dict | None = None,
):
    """FMR envelope density from the Hankel-transform integral.

    f_R(r) = r int_0^inf 1F1(m; 1; -Omega nu^2/4m) Psi_2(m_s; [1]_N; beta(nu)) nu J0(r nu) dnu,
    beta_i(nu) = V_i^2 nu^2 / (4 m_s). Valid for real m and m_s.

    The nu axis is cut at consecutive zeros of J0(r nu); each panel is
    integrated by nested Gauss-Legendre with bisection. Summation stops
    after three consecutive panels below 1e-12 of the running total, or
    when the Wynn-accelerated panel sums settle to 1e-12.

    Parameters
    ----------
    model : ChannelModel
        An FMR model.
    r : float or array_like
    rule : QuadratureRule, optional
        Inner rule for Psi_2; by default chosen per panel.
    max_panels : int
    diagnostics : dict, optional
        Filled with panel counts and the stopping reason per point.

    Raises
    ------
    NumericalError
        Neither stopping rule was met within `max_panels`.
    """
    if model.kind is not Kind.FMR:
        raise UnsupportedPathError("the Hankel integral is the FMR evaluator")
    arr, scalar = _scalar(r)
    flat = arr.ravel()
    out = np.empty_like(flat)
    info = []
    for i, rv in enumerate(flat):
        val, d = _fmr_point(model, float(rv), rule, max_panels)
        out[i] = val
        info.append(d)
    if diagnostics is not None:
        diagnostics["points"] = info
    out = out.reshape(arr.shape)
    return float(out) if scalar else out


def _fmr_point(model, r, rule, max_panels):
    if r == 0:
        return 0.0, {"panels": 0, "stop": "r=0"}
    f = _FmrIntegrand(model, r, rule)
    zeros = _j0_zeros(max_panels) / r
    # Gaussian-type decay bound of the diffuse factor: skip panels beyond it
    # only for integer m, where 1F1 = e^{-y} L_{m-1}(y).
    edges = np.concatenate([[0.0], zeros])
    total = 0.0
    partials = []
    small = 0
    for k in range(max_panels):
        piece = _panel(f, edges[k], edges[k + 1])
        total += piece
        partials.append(total)
        if abs(piece) < 1e-12 * abs(total):
            small += 1
            if small >= 3:
                return r * total, {"panels": k + 1, "stop": "tail"}
        else:
            small = 0
        if k >= 20 and k % 10 == 0:
            w1 = _wynn(partials[-21:])
            w0 = _wynn(partials[-31:-10]) if len(partials) >= 31 else None
            if w0 is not None and abs(w1 - w0) < 1e-12 * max(abs(w1), 1e-300):
                return r * w1, {"panels": k + 1, "stop": "wynn"}
    raise NumericalError(
        "FMR Hankel integral did not converge",
        diagnostics={"panels": max_panels, "last_panel": piece, "total": total},
    )


# ------------------------------------------------------------------ curves


def evaluate_curve(
    meaning: str,
    grid,
    *,
    series: LaguerreSeries | None = None,
    model: ChannelModel | None = None,
    ctx: SnrContext | None = None,
    method: str = "series",
    rule: QuadratureRule | None = None,
) -> EvaluatedCurve:
    """Evaluate a distribution function on a grid and tidy truncation ringing.

    Density values in [-1e-9, 0) are set to zero and counted in
    ``diagnostics["clamped"]``; anything more negative is kept and counted
    in ``diagnostics["negative"]``.
    """
    grid = np.asarray(grid, dtype=float)
    if meaning not in MEANINGS:
        raise ParameterError(f"unknown curve meaning {meaning!r}")
    snr = meaning.startswith("snr")
    if snr and ctx is None:
        raise ParameterError("SNR curves need an SnrContext")
    if method == "series":
        if series is None:
            raise ParameterError("series method needs a LaguerreSeries")
        fn = {
            "envelope_pdf": lambda g: envelope_pdf_series(series, g),
            "envelope_cdf": lambda g: envelope_cdf_series(series, g),
            "snr_pdf": lambda g: snr_pdf_series(series, ctx, g),
            "snr_cdf": lambda g: snr_cdf_series(series, ctx, g),
        }[meaning]
        values = fn(grid)
        tag = "series"
    elif method in ("psi2", "psi2_closed_form", "integral"):
        if model is None:
            raise ParameterError("closed-form methods need the model")
        env = np.sqrt(grid / ctx.gamma0) if snr else grid
        if method == "integral":
            if meaning not in ("envelope_pdf", "snr_pdf"):
                raise UnsupportedPathError("the FMR integral gives densities only")
            values = fmr_envelope_pdf_integral(model, env, rule)
            tag = "integral"
        else:
            if meaning.endswith("pdf"):
                values = envelope_pdf_psi2(model, env, rule)
            else:
                values = envelope_cdf_psi2(model, env, rule)
            tag = "psi2_closed_form"
        if meaning == "snr_pdf":
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(grid > 0, values / (2.0 * np.sqrt(ctx.gamma0 * grid)), np.nan)
            if grid[0] == 0:
                # f_gamma(0) = lim f_R(r) / (2 gamma0 r)
                if tag == "integral":
                    r0 = 1e-7 * math.sqrt(model.total_power)
                    values[0] = fmr_envelope_pdf_integral(model, r0, rule) / (2.0 * ctx.gamma0 * r0)
                else:
                    values[0] = model.m / model.omega * _closed_form_sum(model, 0.0, rule, 1) / ctx.gamma0
    else:
        raise ParameterError(f"unknown method {method!r}")
    values = np.asarray(values, dtype=float)
    clamp = (values < 0) & (values >= -1e-9)
    neg = values < -1e-9
    values = np.where(clamp, 0.0, values)
    return EvaluatedCurve(grid, values, meaning, tag, {"clamped": int(clamp.sum()), "negative": int(neg.sum())})


def count_modes(values, rel_threshold: float = 1e-3) -> int:
    """Number of local maxima of a sampled density.

    Maxima are located by sign changes of the first difference. Peaks lower
    than `rel_threshold` times the global maximum are ignored so that
    truncation ringing in the far tail is not counted as a mode.
    """
    v = np.asarray(values, dtype=float)
    d = np.sign(np.diff(v))
    # carry the previous slope through flat stretches
    for i in range(1, len(d)):
        if d[i] == 0:
            d[i] = d[i - 1]
    peaks = [i + 1 for i in range(len(d) - 1) if d[i] > 0 and d[i + 1] < 0]
    top = v.max()
    return sum(1 for p in peaks if v[p] >= rel_threshold * top)
