"""Seeded Monte Carlo simulator of the multi-ray signal models.

Streams come from numpy's Philox4x64-10 counter-based generator, keyed by
``SeedSequence(seed, spawn_key=(stream_id,))``. Philox4x64 uses the round
multipliers 0xD2E7470EE14C6C93 and 0xCA5A826395121157 and the Weyl key
increments 0x9E3779B97F4A7C15 and 0xBB67AE8584CAA73B; ten rounds per
block. Samples are drawn in a fixed group layout that depends only on
``n``, so a (seed, stream_id, n) triple reproduces bit-identical results.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .errors import ParameterError
from .model import ChannelModel, Kind, SnrContext
from .specfun import q_function

__all__ = [
    "RngSpec",
    "McEstimate",
    "EmpiricalDistribution",
    "sample_envelope",
    "iter_envelope",
    "empirical_pdf",
    "simulate_distribution",
    "simulate_metrics",
    "simulate_metric",
    "simulate_ber",
    "metric_function",
]

MAX_SAMPLES = 10**9
CHUNK = 1 << 20
N_GROUPS = 100


@dataclass(frozen=True)
class RngSpec:
    """Seed and stream identifier of one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise ParameterError("stream_id must be nonnegative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream_id", int(self.stream_id))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


class McEstimate(NamedTuple):
    value: float
    std_error: float
    n: int


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ParameterError("sample count must be a positive integer")
    if n > MAX_SAMPLES:
        raise ParameterError("sample count above 1e9")
    return int(n)


def _draw(model: ChannelModel, gen: np.random.Generator, n: int) -> np.ndarray:
    """One batch of envelope draws."""
    # V_d = sqrt(G), G ~ Gamma(m, Omega/m); numpy uses Marsaglia-Tsang.
    vd = np.sqrt(gen.standard_gamma(model.m, n) * (model.omega / model.m))
    phd = gen.random(n) * (2.0 * math.pi)
    re_ = vd * np.cos(phd)
    im_ = vd * np.sin(phd)
    if model.n_specular:
        if model.kind is Kind.FMR:
            amp = np.sqrt(gen.standard_gamma(model.m_s, n) / model.m_s)
        else:
            amp = 1.0
        sre = np.zeros(n)
        sim = np.zeros(n)
        for v in model.specular:
            ph = gen.random(n) * (2.0 * math.pi)
            sre += v * np.cos(ph)
            sim += v * np.sin(ph)
        re_ += amp * sre
        im_ += amp * sim
    return np.hypot(re_, im_)


def _group_sizes(n: int) -> list:
    g = min(N_GROUPS, n)
    base, extra = divmod(n, g)
    return [base + (1 if i < extra else 0) for i in range(g)]


def iter_envelope(model: ChannelModel, rng: RngSpec, n: int) -> Iterator[tuple]:
    """Yield ``(group_index, samples)`` batches covering n draws.

    The n draws are split into min(100, n) contiguous groups, each drawn
    in batches of at most 2^20; groups are the jackknife blocks.
    """
    n = _check_n(n)
    gen = rng.generator()
    for gi, size in enumerate(_group_sizes(n)):
        left = size
        while left > 0:
            k = min(left, CHUNK)
            yield gi, _draw(model, gen, k)
            left -= k


def sample_envelope(model: ChannelModel, rng: RngSpec, n: int) -> np.ndarray:
    """n i.i.d. envelope draws R as a float array."""
    return np.concatenate([x for _, x in iter_envelope(model, rng, n)])


def _jackknife(group_sums: np.ndarray, group_n: np.ndarray) -> tuple:
    total, count = group_sums.sum(), group_n.sum()
    est = total / count
    g = len(group_n)
    if g < 2:
        return est, math.nan
    loo = (total - group_sums) / (count - group_n)
    se = math.sqrt((g - 1) / g * float(np.sum((loo - loo.mean()) ** 2)))
    return float(est), se


def simulate_metrics(
    model: ChannelModel,
    ctx: SnrContext,
    functionals: dict,
    rng: RngSpec,
    n: int,
) -> dict:
    """Sample means of several functionals of gamma = gamma0 R^2 in one pass.

    Parameters
    ----------
    functionals : dict of name -> callable
        Each callable maps an array of SNR draws to an array of values.

    Returns
    -------
    dict of name -> McEstimate
        Standard errors from the delete-one-group jackknife.
    """
    n = _check_n(n)
    g = len(_group_sizes(n))
    sums = {k: np.zeros(g) for k in functionals}
    counts = np.zeros(g)
    for gi, r in iter_envelope(model, rng, n):
        gamma = ctx.gamma0 * r * r
        counts[gi] += len(r)
        for k, f in functionals.items():
            sums[k][gi] += float(np.sum(np.asarray(f(gamma), dtype=float)))
    out = {}
    for k in functionals:
        est, se = _jackknife(sums[k], counts)
        out[k] = McEstimate(est, se, n)
    return out


_METRIC_RE = re.compile(r"^(mean_snr|capacity|snr_moment_(\d+)|outage\(([^)]+)\)|mgf\(([^)]+)\))$")


def metric_function(metric: str) -> Callable:
    """Map a metric name to its per-sample functional of gamma.

    Accepted names: ``mean_snr``, ``snr_moment_<l>``, ``capacity``,
    ``outage(<gamma_th>)`` and ``mgf(<s>)``.
    """
    mt = _METRIC_RE.match(metric.replace(" ", ""))
    if not mt:
        raise ParameterError(f"unknown metric {metric!r}")
    if mt.group(1) == "mean_snr":
        return lambda g: g
    if mt.group(1) == "capacity":
        return lambda g: np.log2(1.0 + g)
    if mt.group(2) is not None:
        l = int(mt.group(2))
        if l < 1:
            raise ParameterError("moment order must be positive")
        return lambda g: g**l
    if mt.group(3) is not None:
        th = float(mt.group(3))
        return lambda g: (g <= th).astype(float)
    s = float(mt.group(4))
    if s < 0:
        raise ParameterError("mgf argument must be nonnegative")
    return lambda g: np.exp(-s * g)


def simulate_metric(model: ChannelModel, ctx: SnrContext, metric: str, rng: RngSpec, n: int) -> McEstimate:
    """Sample-mean estimate and standard error of one functional of gamma."""
    f = metric_function(metric)
    return simulate_metrics(model, ctx, {metric: f}, rng, n)[metric]


def simulate_ber(model: ChannelModel, ctx: SnrContext, scheme, rng: RngSpec, n: int) -> McEstimate:
    """Analog-average BER: mean of sum_r alpha_r Q(sqrt(beta_r gamma)) over draws."""

    def f(g):
        return sum(a * q_function(np.sqrt(b * g)) for a, b in scheme.terms)

    return simulate_metrics(model, ctx, {"ber": f}, rng, n)["ber"]


@dataclass
class EmpiricalDistribution:
    """Density-normalized histogram plus raw sample moments E[X^k], k = 1..8.

    Draws outside the binning range are counted in `underflow` and
    `overflow`, so sum(counts) <= n_samples.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    underflow: int = 0
    overflow: int = 0
    sample_moments: list = field(default_factory=list)
    moment_errors: list = field(default_factory=list)

    def __post_init__(self):
        if int(self.counts.sum()) + self.underflow + self.overflow != self.n_samples:
            raise ParameterError("histogram counts do not add up to n_samples")
        if not all(math.isfinite(x) for x in self.sample_moments):
            raise ParameterError("sample moments must be finite")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * self.widths)

    def moment(self, k: int) -> tuple:
        """(estimate, standard error) of E[X^k]."""
        return self.sample_moments[k - 1], self.moment_errors[k - 1]

    def to_csv(self) -> str:
        lines = ["edge_lo,edge_hi,density"]
        for lo, hi, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.density):
            lines.append(f"{lo:.17g},{hi:.17g},{d:.17g}")
        return "\n".join(lines) + "\n"


class _Histogrammer:
    def __init__(self, bins: int, rng_pair: tuple, kmax: int = 8):
        if int(bins) != bins or bins < 10:
            raise ParameterError("at least 10 bins are required")
        lo, hi = map(float, rng_pair)
        if not hi > lo:
            raise ParameterError("histogram range must be increasing")
        self.edges = np.linspace(lo, hi, int(bins) + 1)
        self.counts = np.zeros(int(bins), dtype=np.int64)
        self.under = self.over = self.n = 0
        self.kmax = kmax
        self.s1 = [0.0] * kmax
        self.s2 = [0.0] * kmax

    def add(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        self.n += len(x)
        self.under += int(np.count_nonzero(x < self.edges[0]))
        self.over += int(np.count_nonzero(x > self.edges[-1]))
        self.counts += np.histogram(x, self.edges)[0]
        p = np.ones_like(x)
        for k in range(self.kmax):
            p = p * x
            self.s1[k] += float(np.sum(p))
            self.s2[k] += float(np.sum(p * p))

    def result(self) -> EmpiricalDistribution:
        if self.n == 0:
            raise ParameterError("empty sample")
        means, errs = [], []
        for k in range(self.kmax):
            mu = self.s1[k] / self.n
            var = max(0.0, self.s2[k] / self.n - mu * mu) * self.n / max(1, self.n - 1)
            means.append(mu)
            errs.append(math.sqrt(var / self.n))
        return EmpiricalDistribution(self.edges, self.counts, self.n, self.under, self.over, means, errs)


def empirical_pdf(samples, bins: int, range: tuple) -> EmpiricalDistribution:
    """Histogram and moments of an in-memory sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("empty sample")
    h = _Histogrammer(bins, range)
    h.add(x)
    return h.result()


def simulate_distribution(model: ChannelModel, rng: RngSpec, n: int, bins: int, range: tuple) -> EmpiricalDistribution:
    """Streaming histogram of n envelope draws (no n-sized array is kept)."""
    h = _Histogrammer(bins, range)
    for _, r in iter_envelope(model, rng, n):
        h.add(r)
    return h.result()
