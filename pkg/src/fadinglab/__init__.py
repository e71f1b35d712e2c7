"""Distribution functions, statistics and link metrics of MWGD and FMR fading.

MWGD: N constant specular rays with uniform phases plus a Nakagami-m
diffuse component. FMR: the same with a common Gamma fluctuation on the
specular amplitudes.
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    FadingLabError,
    NumericalError,
    ParameterError,
    PrecisionError,
    UnsupportedPathError,
)
from .model import ChannelModel, Kind, SnrContext, classify, epsilon, power_ratio_db, solve_magnitudes
from .series import LaguerreSeries, auto_truncate, coefficients, envelope_even_moments, truncation_bound
from .dist import (
    EvaluatedCurve,
    count_modes,
    envelope_cdf_psi2,
    envelope_cdf_series,
    envelope_pdf_psi2,
    envelope_pdf_series,
    evaluate_curve,
    fmr_envelope_pdf_integral,
    snr_cdf_series,
    snr_pdf_series,
)
from .metrics import (
    BFSK,
    BPSK,
    QPSK,
    LinkReport,
    ModulationScheme,
    amount_of_fading,
    average_ber,
    average_ber_closed_form,
    cqei,
    ergodic_capacity,
    link_report,
    mgf,
    outage_asymptote,
    outage_capacity,
    outage_probability,
    snr_moment,
)
from .mc import EmpiricalDistribution, RngSpec, sample_envelope, simulate_ber, simulate_metric

__all__ = [name for name in dir() if not name.startswith("_")]
