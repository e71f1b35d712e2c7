"""Laguerre-series representation of the envelope distribution.

The density of R is expanded as

    f_R(r) = 2 eps r exp(-eps r^2) sum_n C_n L_n(eps r^2),

with eps = 1/E[R^2] and C_n = E[L_n(eps R^2)]. The coefficients follow from
the even moments of R, which obey a convolution recursion over the
independent phasors that make up the received signal.

Working scale
-------------
Write U_k = eps^k E[R^{2k}] / (k!)^2. For a sum of independent phasors with
uniform phases the recursion

    E[R^{2k}] = sum_i binom(k, i)^2 E[R_a^{2i}] E[R_b^{2k-2i}]

becomes a plain convolution of the U sequences. A specular ray of power
x = eps V^2 contributes x^k / k!^2 and the Nakagami diffuse term
(m)_k (eps Omega / m)^k / k!^2. With b_k = k! U_k the coefficients are the
alternating binomial sums C_n = sum_k (-1)^k binom(n, k) b_k.

The alternating sums cancel badly: the largest term grows roughly like 2^n
while C_n decays. Extended precision therefore uses Arb ball arithmetic
(python-flint) with a working precision chosen from the size of the
largest term; the ball radii certify the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import flint
import numpy as np

from .errors import ConvergenceError, ParameterError, PrecisionError
from .model import ChannelModel, Kind, epsilon

__all__ = [
    "LaguerreSeries",
    "MAX_ORDER",
    "envelope_even_moments",
    "coefficients",
    "truncation_bound",
    "auto_truncate",
    "tail_from_coefficients",
]

# Default cap on the truncation order searched by auto_truncate. Strongly
# specular models with large m converge much more slowly; raise it per call.
MAX_ORDER = 200

# Cancellation ratio above which the standard double path is abandoned.
_CANCEL_LIMIT = 1e12


@dataclass(frozen=True)
class LaguerreSeries:
    """Truncated Laguerre series {eps, C_0..C_M} with its tail estimate.

    Attributes
    ----------
    epsilon : float
        Expansion scale 1 / E[R^2].
    coeffs : tuple of float
        C_0..C_M.
    truncation_order : int
        M.
    tail_estimate : float
        Estimate of sum_{n>M} |C_n|.
    precision_mode : str
        ``"standard"`` (double) or ``"extended"`` (Arb balls).
    extended_only : bool
        True when double and extended results disagree by more than 1e-8
        for some n <= 30, i.e. double precision alone is not trustworthy.
    tail_coeffs : tuple of float
        Coefficients beyond M that were computed as look-ahead; they feed
        the tail estimate and allow cheap re-truncation.
    """

    epsilon: float
    coeffs: tuple
    truncation_order: int
    tail_estimate: float
    precision_mode: str = "extended"
    extended_only: bool = False
    tail_coeffs: tuple = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "tail_coeffs", tuple(float(c) for c in self.tail_coeffs))
        if len(self.coeffs) != self.truncation_order + 1:
            raise ParameterError("coeffs must hold C_0..C_M")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ParameterError("series coefficients must be finite")
        if not self.tail_estimate >= 0:
            raise ParameterError("tail estimate must be nonnegative")
        if self.precision_mode not in ("standard", "extended"):
            raise ParameterError("precision_mode is 'standard' or 'extended'")

    @property
    def order(self) -> int:
        return self.truncation_order

    def truncated(self, order: int) -> "LaguerreSeries":
        """The same expansion cut at a lower (or look-ahead covered) order."""
        allc = self.coeffs + self.tail_coeffs
        if not 0 <= order < len(allc):
            raise ParameterError(f"order {order} not available (have {len(allc) - 1})")
        return LaguerreSeries(
            self.epsilon,
            allc[: order + 1],
            order,
            tail_from_coefficients(allc, order),
            self.precision_mode,
            self.extended_only,
            allc[order + 1 :],
        )

    def with_coefficient(self, n: int, value: float) -> "LaguerreSeries":
        """Copy with C_n replaced; used for negative-control tests."""
        c = list(self.coeffs)
        c[n] = value
        return LaguerreSeries(
            self.epsilon, c, self.truncation_order, self.tail_estimate,
            self.precision_mode, self.extended_only, self.tail_coeffs,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        d["tail_coeffs"] = list(self.tail_coeffs)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "LaguerreSeries":
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "LaguerreSeries":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- moments


def _fluct_factor(m_s, k):
    """E[xi^k] for xi ~ Gamma(m_s, 1/m_s), i.e. (m_s)_k / m_s^k."""
    out = 1.0
    for i in range(k):
        out *= (m_s + i) / m_s
    return out


def envelope_even_moments(model: ChannelModel, max_k: int, *, verbatim: bool = False) -> list:
    """Even moments E[R^0], E[R^2], ..., E[R^{2 max_k}] by the phasor recursion.

    Parameters
    ----------
    model : ChannelModel
    max_k : int
        Highest moment index, 0 <= max_k <= 200.
    verbatim : bool, optional
        FMR only. Apply the Gamma moment (m_s)_k/m_s^k to every specular
        component separately, as if each ray had its own fluctuation. The
        model draws a single fluctuation shared by all rays, so the default
        applies the factor once to the combined specular moments. The two
        coincide for N <= 1.

    Returns
    -------
    list of float

    Raises
    ------
    PrecisionError
        If a moment overflows double precision; `coefficients` works in
        extended precision instead.
    """
    if int(max_k) != max_k or not 0 <= max_k <= 200:
        raise ParameterError("max_k must be an integer in [0, 200]")
    K = int(max_k)
    binsq = [[math.comb(k, i) ** 2 for i in range(k + 1)] for k in range(K + 1)]

    def step(u, nu):
        out = []
        for k in range(K + 1):
            out.append(math.fsum(binsq[k][i] * u[i] * nu[k - i] for i in range(k + 1)))
        return out

    fmr = model.kind is Kind.FMR
    fl = [_fluct_factor(model.m_s, k) for k in range(K + 1)] if fmr else None
    try:
        u = [1.0] + [0.0] * K  # empty sum of phasors
        for v in model.specular:
            nu = [(v * v) ** k for k in range(K + 1)]
            if fmr and verbatim:
                nu = [a * b for a, b in zip(nu, fl)]
            u = step(u, nu)
        if fmr and not verbatim:
            u = [a * b for a, b in zip(u, fl)]
        m, om = model.m, model.omega
        diff = [1.0]
        for k in range(1, K + 1):
            diff.append(diff[-1] * (m + k - 1) * om / m)
        u = step(u, diff)
    except OverflowError as exc:
        raise PrecisionError("moment overflow; use coefficients() which works in extended precision") from exc
    if not all(math.isfinite(x) for x in u):
        raise PrecisionError("moment overflow; use coefficients() which works in extended precision")
    return u


def _u_series(model, K, verbatim):
    """U_0..U_K as an Arb power series at the current flint precision."""
    arb = flint.arb
    one = arb(1)

    def seq(ratio):
        out = [one]
        for kk in range(1, K + 1):
            out.append(out[-1] * ratio(kk))
        return out

    eps = arb(epsilon(model))
    fmr = model.kind is Kind.FMR
    if fmr:
        ms = arb(model.m_s)
        fl = seq(lambda kk: (ms + kk - 1) / ms)
    u = None
    for v in model.specular:
        x = eps * arb(v) * arb(v)
        s = seq(lambda kk, x=x: x / (kk * kk))
        if fmr and verbatim:
            s = [p * q for p, q in zip(s, fl)]
        u = flint.arb_series(s) if u is None else u * flint.arb_series(s)
    if u is not None and fmr and not verbatim:
        u = flint.arb_series([p * q for p, q in zip(u.coeffs(), fl)])
    m = arb(model.m)
    t = eps * arb(model.omega) / m
    d = flint.arb_series(seq(lambda kk: (m + kk - 1) * t / (kk * kk)))
    u = d if u is None else u * d
    uc = u.coeffs()
    return uc + [arb(0)] * (K + 1 - len(uc))


def _largest_term_bits(model, K, verbatim):
    """log2 of the largest term binom(n, k) k! U_k over all n <= K.

    binom(n, k) grows with n, so n = K gives the maximum for every k. The
    U_k are positive and well conditioned, so 64-bit Arb is enough here;
    its exponent range avoids the overflow a double pass would hit.
    """
    saved = (flint.ctx.prec, flint.ctx.cap)
    flint.ctx.prec, flint.ctx.cap = 64, K + 1
    try:
        u = _u_series(model, K, verbatim)
        worst = -math.inf
        lk = math.lgamma(K + 1.0)
        for k, c in enumerate(u):
            if c > 0:
                lb = float(c.log()) + lk - math.lgamma(K - k + 1.0)
                worst = max(worst, lb)
    finally:
        flint.ctx.prec, flint.ctx.cap = saved
    return worst / math.log(2.0)


def _plan_bits(model, K, verbatim):
    """Working precision covering the largest term of every alternating sum."""
    worst = max(_largest_term_bits(model, K, verbatim), 0.0)
    # room for 2^-64 absolute accuracy plus safety
    return int(worst + math.log2(K + 2)) + 64 + 64


def _coefficients_extended(model, K, verbatim, bits=None):
    """Coefficients in Arb ball arithmetic (python-flint).

    Both the phasor convolutions and the binomial transform are truncated
    power-series products: C_n = n! [t^n] (sum_k (-1)^k U_k t^k) e^t. The
    radii of the resulting balls bound the rounding error rigorously.
    """
    if bits is None:
        bits = _plan_bits(model, K, verbatim)
    bits = max(bits, 128)
    saved = (flint.ctx.prec, flint.ctx.cap)
    flint.ctx.prec, flint.ctx.cap = bits, K + 1
    try:
        arb = flint.arb
        uc = _u_series(model, K, verbatim)
        alt = flint.arb_series([c if k % 2 == 0 else -c for k, c in enumerate(uc)])
        inv_fact = [arb(1)]
        for kk in range(1, K + 1):
            inv_fact.append(inv_fact[-1] / kk)
        q = (alt * flint.arb_series(inv_fact)).coeffs()
        q = q + [arb(0)] * (K + 1 - len(q))
        out = np.empty(K + 1)
        worst = 0.0
        fact = arb(1)
        for n in range(K + 1):
            if n:
                fact = fact * n
            c = q[n] * fact
            out[n] = float(c.mid())
            worst = max(worst, float(c.rad()))
    finally:
        flint.ctx.prec, flint.ctx.cap = saved
    if worst > 1e-15:
        raise PrecisionError(f"extended coefficients carry error {worst:.3g}; precision plan too small")
    return out, bits


def _coefficients_standard(model, K, verbatim):
    """Double-precision coefficients with compensated summation.

    Returns the coefficients and the worst cancellation ratio
    (largest |term| / |C_n|) met along the way.
    """
    eps = epsilon(model)
    k = np.arange(K + 1)
    lf = np.array([math.lgamma(i + 1.0) for i in k])

    def b_spec(x):
        if x == 0:
            return np.where(k == 0, 1.0, 0.0)
        return np.exp(k * math.log(x) - lf)

    binom = [np.exp(lf[n] - lf[: n + 1] - lf[n::-1]) for n in range(K + 1)]
    binom = [np.round(r) if n < 50 else r for n, r in enumerate(binom)]

    def bconv(a, c):
        return np.array([math.fsum(binom[n] * a[: n + 1] * c[n::-1]) for n in range(K + 1)])

    fmr = model.kind is Kind.FMR
    fl = np.cumprod(np.concatenate([[1.0], (model.m_s + k[:-1]) / model.m_s])) if fmr else None
    acc = None
    for v in model.specular:
        s = b_spec(eps * v * v)
        if fmr and verbatim:
            s = s * fl
        acc = s if acc is None else bconv(acc, s)
    if acc is not None and fmr and not verbatim:
        acc = acc * fl
    m = model.m
    lpoch = np.array([math.lgamma(m + i) - math.lgamma(m) for i in k])
    d = np.exp(lpoch + k * math.log(eps * model.omega / m) - lf)
    b = d if acc is None else bconv(acc, d)
    out = np.empty(K + 1)
    worst = 0.0
    for n in range(K + 1):
        terms = binom[n] * b[: n + 1] * np.where(np.arange(n + 1) % 2, -1.0, 1.0)
        if not np.all(np.isfinite(terms)):
            # overflow in double: leave it to the extended path
            out[n:] = math.nan
            return out, math.inf
        out[n] = math.fsum(terms)
        big = float(np.max(np.abs(terms)))
        if out[n] != 0:
            worst = max(worst, big / abs(out[n]))
        elif big > 0 and n > 0:
            worst = math.inf
    return out, worst


def tail_from_coefficients(coeffs: Sequence[float], order: int, window: int = 5, cap: float = 0.99) -> float:
    """Estimate sum_{n>order} |C_n| from the available coefficients.

    Coefficients beyond `order` that are present are summed exactly. The
    rest is a geometric tail started from the largest of the last `window`
    values, with ratio taken from the last two windows and capped at `cap`.
    """
    a = np.abs(np.asarray(coeffs, dtype=float))
    known = float(np.sum(a[order + 1 :]))
    if len(a) < 2:
        return known
    last = a[-window:]
    prev = a[-2 * window : -window] if len(a) >= 2 * window + 1 else a[1 : max(2, len(a) - window)]
    base = float(np.max(last))
    if base == 0:
        return known
    pmax = float(np.max(prev)) if len(prev) else 0.0
    ratio = cap if pmax == 0 else min(cap, (base / pmax) ** (1.0 / window))
    return known + base * ratio / (1.0 - ratio)


def _lookahead(order):
    return max(20, order // 4)


def coefficients(
    model: ChannelModel,
    max_order: int,
    *,
    precision: str = "auto",
    lookahead: int | None = None,
    verbatim: bool = False,
) -> LaguerreSeries:
    """Laguerre coefficients C_0..C_M of the envelope density.

    Parameters
    ----------
    model : ChannelModel
    max_order : int
        Truncation order M.
    precision : {"auto", "standard", "extended"}
        ``"auto"`` runs the double path first and switches to Arb as soon
        as some alternating sum has a term larger than 1e12 |C_n|.
    lookahead : int, optional
        Extra coefficients computed past M for the tail estimate; defaults
        to max(20, M // 4). Zero gives the plain five-point extrapolation.
    verbatim : bool
        Use the per-ray fluctuation moments (see `envelope_even_moments`).

    Returns
    -------
    LaguerreSeries

    Raises
    ------
    ConvergenceError
        If a coefficient is not finite.
    """
    if int(max_order) != max_order or max_order < 1:
        raise ParameterError("max_order must be a positive integer")
    if precision not in ("auto", "standard", "extended"):
        raise ParameterError("precision must be auto, standard or extended")
    M = int(max_order)
    L = _lookahead(M) if lookahead is None else int(lookahead)
    K = M + L
    mode = "standard"
    extended_only = False
    std = None
    bits = None
    if precision == "auto":
        bits = _plan_bits(model, K, verbatim)
        # terms beyond 2^45 cannot survive the double path's cancellation limit
        if bits - 128 - math.log2(K + 2) > 45:
            precision = "extended"
    if precision != "extended" and K <= 1000:
        with np.errstate(all="ignore"):
            std, worst = _coefficients_standard(model, K, verbatim)
        if not np.all(np.isfinite(std)):
            worst = math.inf
        if precision == "standard" or worst <= _CANCEL_LIMIT:
            c = std
        else:
            mode = "extended"
    elif precision == "standard":
        raise ParameterError("standard precision supports orders up to 1000")
    else:
        mode = "extended"
    if mode == "extended":
        c, _ = _coefficients_extended(model, K, verbatim, bits)
        if std is None:
            with np.errstate(all="ignore"):
                std, _ = _coefficients_standard(model, min(K, 30), verbatim)
        n = min(len(std), 31)
        extended_only = bool(np.any(np.abs(std[:n] - c[:n]) > 1e-8))
    if not np.all(np.isfinite(c)):
        raise ConvergenceError("non-finite Laguerre coefficient", tail=math.inf)
    return LaguerreSeries(
        epsilon(model),
        c[: M + 1],
        M,
        tail_from_coefficients(c, M),
        mode,
        extended_only,
        c[M + 1 :],
    )


def truncation_bound(series: LaguerreSeries) -> float:
    """Upper bound sqrt(eps pi) (sum_{n>M} |C_n|)^2 on the integrated squared error.

    It follows from |exp(-x/2) L_n(x)| <= 1; the infinite tail sum is
    replaced by `series.tail_estimate`.
    """
    return math.sqrt(series.epsilon * math.pi) * series.tail_estimate**2


def _next_order(allc: np.ndarray, order: int, tol: float) -> int:
    """Order to try next: extrapolate the geometric decay of |C_n| down to tol."""
    a = np.abs(allc[1:])
    w = max(5, len(a) // 10)
    hi, lo = a[-2 * w : -w].max(), a[-w:].max()
    if lo <= 0 or hi <= lo:
        return 2 * order
    rate = math.log(lo / hi) / w
    need = len(a) + math.log(tol / (10.0 * lo)) / rate
    return int(min(2 * order, max(order + 50, 1.15 * need + 20)))


def auto_truncate(
    model: ChannelModel,
    tol: float,
    *,
    max_order: int = MAX_ORDER,
    verbatim: bool = False,
) -> LaguerreSeries:
    """Smallest order M whose last three coefficients and error bound are below tol.

    The window is {C_{M-2}, C_{M-1}, C_M} without C_0, starting at M = 2.
    The search starts at order 50 and extrapolates the geometric decay of
    the coefficients to choose the next order, up to `max_order`. Orders
    inside the look-ahead of a pass are accepted when at least ten computed
    coefficients lie beyond them.

    Raises
    ------
    ParameterError
        tol outside [1e-14, 1e-2].
    ConvergenceError
        No order up to `max_order` qualifies.
    """
    if not 1e-14 <= tol <= 1e-2:
        raise ParameterError("tol must lie in [1e-14, 1e-2]")
    order = min(50, max_order)
    while True:
        full = coefficients(model, order, verbatim=verbatim)
        allc = np.array(full.coeffs + full.tail_coeffs)
        a = np.abs(allc)
        # accept any M that still has ten computed coefficients beyond it
        for M in range(2, min(max_order, max(order, len(allc) - 11)) + 1):
            if max(a[max(1, M - 2) : M + 1]) >= tol:
                continue
            tail = tail_from_coefficients(allc, M)
            if math.sqrt(full.epsilon * math.pi) * tail**2 < tol:
                return full.truncated(M)
        if order >= max_order:
            raise ConvergenceError(
                f"no truncation order <= {max_order} reaches tol={tol:g}",
                tail=full.tail_estimate,
            )
        order = min(_next_order(allc, order, tol), max_order)
