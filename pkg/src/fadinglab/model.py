"""Channel parameter types and the quantities derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import ParameterError

__all__ = [
    "Kind",
    "ChannelModel",
    "SnrContext",
    "epsilon",
    "power_ratio_db",
    "solve_magnitudes",
    "classify",
    "DETERMINISTIC_MS",
]

# Fluctuation shapes at or above this are reported as effectively constant.
DETERMINISTIC_MS = 1e6


class Kind(str, Enum):
    MWGD = "mwgd"
    FMR = "fmr"


@dataclass(frozen=True)
class ChannelModel:
    """Parameters of an MWGD or FMR channel.

    Parameters
    ----------
    kind : Kind
        ``Kind.MWGD`` or ``Kind.FMR``.
    specular : tuple of float
        Magnitudes V_1..V_N of the specular rays, N >= 0. Zero entries are
        kept as given; they behave like an absent ray.
    m : float
        Nakagami shape of the diffuse envelope, m >= 0.5.
    omega : float
        Nakagami spread (mean diffuse power), > 0.
    m_s : float or None
        Gamma shape of the common specular fluctuation; FMR only.
    """

    kind: Kind
    specular: tuple = field(default_factory=tuple)
    m: float = 1.0
    omega: float = 1.0
    m_s: float | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        spec = tuple(float(v) for v in self.specular)
        object.__setattr__(self, "specular", spec)
        if any(not math.isfinite(v) or v < 0 for v in spec):
            raise ParameterError("specular magnitudes must be finite and nonnegative")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ParameterError("omega must be positive")
        if not (math.isfinite(self.m) and self.m >= 0.5):
            raise ParameterError("Nakagami shape m must be >= 0.5")
        if kind is Kind.FMR:
            if self.m_s is None or not self.m_s > 0 or not math.isfinite(self.m_s):
                raise ParameterError("FMR model needs a positive fluctuation shape m_s")
            object.__setattr__(self, "m_s", float(self.m_s))
        elif self.m_s is not None:
            raise ParameterError("m_s is only meaningful for the FMR model")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "omega", float(self.omega))

    @classmethod
    def mwgd(cls, specular: Iterable[float] = (), m: float = 1.0, omega: float = 1.0):
        return cls(Kind.MWGD, tuple(specular), m, omega)

    @classmethod
    def fmr(cls, specular: Iterable[float], m_s: float, m: float = 1.0, omega: float = 1.0):
        return cls(Kind.FMR, tuple(specular), m, omega, m_s)

    @property
    def n_specular(self) -> int:
        return len(self.specular)

    @property
    def specular_power(self) -> float:
        return math.fsum(v * v for v in self.specular)

    @property
    def total_power(self) -> float:
        """E[R^2] = sum V_i^2 + Omega (the fluctuation has unit mean)."""
        return self.specular_power + self.omega

    @property
    def integer_m(self) -> bool:
        return self.m.is_integer()

    def as_mwgd(self) -> "ChannelModel":
        """The same rays and diffuse part without fluctuation."""
        return ChannelModel.mwgd(self.specular, self.m, self.omega)

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "specular": list(self.specular), "m": self.m, "omega": self.omega}
        if self.m_s is not None:
            out["m_s"] = self.m_s
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelModel":
        return cls(
            Kind(data["kind"]),
            tuple(data.get("specular", ())),
            data.get("m", 1.0),
            data.get("omega", 1.0),
            data.get("m_s"),
        )


@dataclass(frozen=True)
class SnrContext:
    """Transmit SNR gamma0 = Eb/N0 and the resulting average SNR.

    `gamma_bar` always equals ``gamma0 * model.total_power`` as computed in
    floating point; build instances through the class methods.
    """

    gamma0: float
    gamma_bar: float

    @classmethod
    def from_gamma0(cls, model: ChannelModel, gamma0: float) -> "SnrContext":
        if not gamma0 > 0:
            raise ParameterError("gamma0 must be positive")
        return cls(float(gamma0), float(gamma0) * model.total_power)

    @classmethod
    def from_gamma_bar(cls, model: ChannelModel, gamma_bar: float) -> "SnrContext":
        if not gamma_bar > 0:
            raise ParameterError("average SNR must be positive")
        return cls.from_gamma0(model, gamma_bar / model.total_power)

    @classmethod
    def from_gamma_bar_db(cls, model: ChannelModel, gamma_bar_db: float) -> "SnrContext":
        return cls.from_gamma_bar(model, 10.0 ** (gamma_bar_db / 10.0))

    @property
    def gamma_bar_db(self) -> float:
        return 10.0 * math.log10(self.gamma_bar)


def epsilon(model: ChannelModel) -> float:
    """Scale of the Laguerre expansion, 1 / (sum V_i^2 + Omega)."""
    return 1.0 / model.total_power


def power_ratio_db(model: ChannelModel) -> float:
    """Specular-to-diffuse power ratio K^(N) in dB; -inf without specular power."""
    p = model.specular_power
    if p == 0:
        return -math.inf
    return 10.0 * math.log10(p / model.omega)


def solve_magnitudes(ratio_db: float, shape: Sequence[float], omega: float = 1.0) -> tuple:
    """Scale relative ray proportions to hit a target power ratio.

    Parameters
    ----------
    ratio_db : float
        Target K^(N) in dB.
    shape : sequence of float
        Relative magnitudes, e.g. ``(1, 1/2, 1/3)`` for V1 = 2 V2 = 3 V3.
    omega : float
        Diffuse power.

    Returns
    -------
    tuple of float
        Magnitudes V with sum V^2 = omega * 10^(ratio_db/10).
    """
    shape = [float(s) for s in shape]
    if not shape:
        raise ParameterError("shape must contain at least one ray")
    if any(s <= 0 or not math.isfinite(s) for s in shape):
        raise ParameterError("shape entries must be positive")
    if not math.isfinite(ratio_db):
        raise ParameterError("power ratio must be finite")
    target = omega * 10.0 ** (ratio_db / 10.0)
    scale = math.sqrt(target / math.fsum(s * s for s in shape))
    return tuple(s * scale for s in shape)


def classify(model: ChannelModel) -> list:
    """Known special cases matched by the parameters.

    The catalog (Rayleigh, Rician, Nakagami-m, TWDP, MWDP, FTR) follows the
    usual definitions of those models. Labels are informational.
    """
    rays = [v for v in model.specular if v > 0]
    labels = []
    fluct = model.kind is Kind.FMR and model.m_s < DETERMINISTIC_MS
    if model.kind is Kind.FMR and not fluct:
        labels.append("effectively-deterministic-fluctuation")
    if not rays:
        labels.append("Rayleigh" if model.m == 1 else "Nakagami-m")
    elif model.m == 1:
        if len(rays) == 1:
            labels.append("Rician-shadowed" if fluct else "Rician")
        elif len(rays) == 2:
            labels.append("FTR" if fluct else "TWDP")
        if not fluct:
            labels.append("MWDP")
    labels.append(model.kind.name)
    return labels
