import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import model_id, sweep_models
from fadinglab import ChannelModel, SnrContext, auto_truncate, envelope_even_moments, solve_magnitudes
from fadinglab.errors import ConsistencyError, DomainError, ParameterError
from fadinglab.metrics import (
    BFSK,
    BPSK,
    LOG2E,
    PRESET_SCHEMES,
    QPSK,
    LinkReport,
    ModulationScheme,
    amount_of_fading,
    average_ber,
    average_ber_closed_form,
    average_ber_quadrature,
    capacity_low_snr_asymptote,
    capacity_moment_series,
    cqei,
    ergodic_capacity,
    ergodic_capacity_quadrature,
    link_report,
    mgf,
    mgf_moment_form,
    outage_asymptote,
    outage_capacity,
    outage_probability,
    snr_moment,
    verbatim_report,
)
from fadinglab.presets import SHAPES

RAYLEIGH = ChannelModel.mwgd(())
FIG1_EQUAL = ChannelModel.mwgd(solve_magnitudes(10.0, (1, 1, 1)))


def rician(k_lin, omega=1.0):
    return ChannelModel.mwgd((math.sqrt(k_lin * omega),), 1, omega)


@pytest.fixture(scope="module")
def ray():
    return auto_truncate(RAYLEIGH, 1e-10)


@pytest.fixture(scope="module")
def fig1():
    return auto_truncate(FIG1_EQUAL, 1e-8)


class TestSchemes:
    def test_presets(self):
        assert BPSK.terms == ((1.0, 2.0),)
        assert BFSK.terms == ((1.0, 1.0),) and QPSK.terms == ((1.0, 1.0),)
        assert set(PRESET_SCHEMES) == {"BPSK", "BFSK", "QPSK"}
        assert BPSK.instantaneous_ber(0.0) == pytest.approx(0.5)
        assert BPSK.max_ber == 0.5

    @pytest.mark.parametrize("terms", [(), ((1.0, 0.0),), ((3.0, 1.0),), ((-1.0, 1.0),)])
    def test_invalid(self, terms):
        with pytest.raises(ParameterError):
            ModulationScheme("bad", terms)

    def test_multi_term(self):
        s = ModulationScheme("16QAM-ish", ((0.75, 0.4), (0.5, 3.6)))
        assert s.max_ber == pytest.approx(0.625)


class TestMoments:
    def test_first_moment(self, fig1):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, 5.0)
        assert snr_moment(fig1, ctx, 1) == pytest.approx(ctx.gamma_bar, rel=1e-12)

    def test_rayleigh_second_moment(self, ray):
        ctx = SnrContext.from_gamma_bar(RAYLEIGH, 3.0)
        brute, _ = quad(lambda x: x * x * math.exp(-x / 3.0) / 3.0, 0, np.inf)
        assert snr_moment(ray, ctx, 2) == pytest.approx(brute, rel=1e-10)
        assert snr_moment(ray, ctx, 2) == pytest.approx(18.0, rel=1e-13)
        assert snr_moment(ray, ctx, 5) == pytest.approx(120 * 3.0**5, rel=1e-12)

    @pytest.mark.parametrize("model", sweep_models(n_values=(0, 1, 3), k_db=(0.0, 10.0), m_values=(1, 2), ms_values=(3.0, 1e4)), ids=model_id)
    def test_against_recursion(self, model):
        s = auto_truncate(model, 1e-8, max_order=4000)
        ctx = SnrContext.from_gamma0(model, 1.7)
        mu = envelope_even_moments(model, 6)
        for l in range(1, 7):
            assert snr_moment(s, ctx, l) == pytest.approx(1.7**l * mu[l], rel=1e-9)

    def test_verbatim_drops_factorial(self, fig1):
        ctx = SnrContext.from_gamma0(FIG1_EQUAL, 1.0)
        for l in (2, 3, 4):
            assert snr_moment(fig1, ctx, l) == pytest.approx(math.factorial(l) * snr_moment(fig1, ctx, l, verbatim=True))

    def test_amount_of_fading(self, ray, oracles):
        assert amount_of_fading(ray) == pytest.approx(1.0, abs=1e-13)
        s = auto_truncate(rician(5.0), 1e-10)
        assert amount_of_fading(s) == pytest.approx(oracles["rician_af_k5"], rel=1e-12)
        assert amount_of_fading(s) == pytest.approx(11 / 36, rel=1e-12)
        assert amount_of_fading(s, verbatim=True) == pytest.approx(s.coeffs[2])

    def test_cqei(self, fig1):
        ctx = SnrContext.from_gamma_bar(FIG1_EQUAL, 2.0)
        assert cqei(fig1, ctx) == pytest.approx(amount_of_fading(fig1) / 2)


class TestMgf:
    def test_examples(self, ray, fig1):
        ctx = SnrContext.from_gamma_bar(RAYLEIGH, 4.0)
        assert mgf(fig1, SnrContext.from_gamma0(FIG1_EQUAL, 1.0), 0.0) == pytest.approx(1.0, abs=1e-12)
        s = np.linspace(0, 5, 30)
        assert np.max(np.abs(mgf(ray, ctx, s) - 1 / (1 + 4 * s))) < 1e-14

    def test_rician_oracle(self, oracles):
        d = oracles["rician_mgf_k5_gbar10"]
        model = rician(d["k"])
        s = auto_truncate(model, 1e-12)
        ctx = SnrContext.from_gamma_bar(model, d["gbar"])
        assert np.max(np.abs(mgf(s, ctx, np.array(d["s"])) - d["mgf"])) < 1e-7

    def test_rician_closed_form_grid(self):
        k, g = 3.0, 5.0
        s_ = auto_truncate(rician(k), 1e-12)
        ctx = SnrContext.from_gamma_bar(rician(k), g)
        s = np.linspace(0, 10, 40)
        ref = (1 + k) / (1 + k + s * g) * np.exp(-k * s * g / (1 + k + s * g))
        assert np.max(np.abs(mgf(s_, ctx, s) - ref)) < 1e-7

    def test_monotone_and_bounded(self, fig1):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, 10.0)
        v = mgf(fig1, ctx, np.linspace(0, 20, 400))
        assert np.all(np.diff(v) <= 1e-15)
        assert np.all((v > 0) & (v <= 1 + 1e-12))

    def test_negative_s(self, ray):
        with pytest.raises(DomainError):
            mgf(ray, SnrContext.from_gamma0(RAYLEIGH, 1.0), -0.1)

    def test_moment_form_brackets(self, fig1):
        ctx = SnrContext.from_gamma_bar(FIG1_EQUAL, 1.0)
        for s in (0.05, 0.15, 0.3):
            exact = mgf(fig1, ctx, s)
            p = mgf_moment_form(fig1, ctx, s, 20)
            assert abs(p[-1] - exact) < 1e-6
            for a, b in zip(p[2:-1], p[3:]):
                assert min(a, b) - 1e-12 <= exact <= max(a, b) + 1e-12


class TestCapacity:
    def test_rayleigh_oracles(self, ray, oracles):
        c1 = ergodic_capacity(ray, SnrContext.from_gamma_bar(RAYLEIGH, 1.0))
        assert c1 == pytest.approx(oracles["rayleigh_capacity_gbar1"], rel=1e-12)
        assert c1 == pytest.approx(0.8603, abs=5e-5)
        c10 = ergodic_capacity(ray, SnrContext.from_gamma_bar(RAYLEIGH, 10.0))
        assert c10 == pytest.approx(oracles["rayleigh_capacity_gbar10"], rel=1e-12)

    @pytest.mark.parametrize("model", sweep_models(n_values=(0, 2, 3), k_db=(0.0, 15.0), m_values=(1, 3), ms_values=(3.0,)), ids=model_id)
    @pytest.mark.parametrize("gdb", [-10.0, 10.0, 30.0])
    def test_against_quadrature(self, model, gdb):
        s = auto_truncate(model, 1e-8, max_order=4000)
        ctx = SnrContext.from_gamma_bar_db(model, gdb)
        assert ergodic_capacity(s, ctx) == pytest.approx(ergodic_capacity_quadrature(s, ctx), rel=1e-6)

    @pytest.mark.parametrize("model", [RAYLEIGH, FIG1_EQUAL, ChannelModel.fmr(solve_magnitudes(10.0, (1, 0.5)), 3.0, 2)], ids=model_id)
    def test_low_snr(self, model):
        s = auto_truncate(model, 1e-8)
        ctx = SnrContext.from_gamma_bar(model, 0.01)
        ratio = ergodic_capacity(s, ctx) / capacity_low_snr_asymptote(ctx)
        assert 0.98 <= ratio <= 1.0

    def test_asymptote_examples(self):
        assert capacity_low_snr_asymptote(SnrContext.from_gamma_bar(RAYLEIGH, 1.0)) == pytest.approx(1.4427, abs=1e-4)
        assert capacity_low_snr_asymptote(SnrContext.from_gamma_bar(RAYLEIGH, 0.1)) == pytest.approx(0.14427, abs=1e-5)
        assert LOG2E == pytest.approx(1.4426950408889634)

    def test_moment_series(self, fig1):
        ctx = SnrContext.from_gamma_bar(FIG1_EQUAL, 0.05)
        exact = ergodic_capacity(fig1, ctx)
        p = capacity_moment_series(fig1, ctx, 4)
        # asymptotic series: each extra term shrinks the error at this gbar
        errors = [abs(v - exact) for v in p]
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < 1e-4 * exact
        with pytest.raises(DomainError):
            capacity_moment_series(fig1, SnrContext.from_gamma_bar(FIG1_EQUAL, 1.0))

    @staticmethod
    def _shape_capacities(gdb):
        out = []
        for v in SHAPES.values():
            model = ChannelModel.mwgd(solve_magnitudes(10.0, v))
            out.append(ergodic_capacity(auto_truncate(model, 1e-8), SnrContext.from_gamma_bar_db(model, gdb)))
        return out

    def test_fig3d_shapes_similar_at_low_snr(self):
        caps = self._shape_capacities(-10.0)
        assert (max(caps) - min(caps)) / min(caps) < 0.02

    @pytest.mark.xfail(strict=True, reason="exact capacities of the three shapes differ by 2.8% at -5 dB and 4.8% at 0 dB; Monte Carlo agrees")
    @pytest.mark.parametrize("gdb", [-5.0, 0.0])
    def test_fig3d_shapes_within_two_percent_up_to_0db(self, gdb):
        caps = self._shape_capacities(gdb)
        assert (max(caps) - min(caps)) / min(caps) < 0.02


class TestOutage:
    def test_rayleigh(self, ray):
        ctx = SnrContext.from_gamma_bar(RAYLEIGH, 5.0)
        for th in (0.1, 1.0, 5.0, 20.0):
            assert outage_probability(ray, ctx, th) == pytest.approx(1 - math.exp(-th / 5.0), abs=1e-12)
        assert outage_probability(ray, ctx, 1e-12) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(DomainError):
            outage_probability(ray, ctx, 0.0)

    def test_outage_capacity_mappings(self, fig1):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, 5.0)
        assert outage_capacity(fig1, ctx, 2.0) == outage_probability(fig1, ctx, 2.0)
        assert outage_capacity(fig1, ctx, 2.0, mapping="shannon") == outage_probability(fig1, ctx, 3.0)
        with pytest.raises(ParameterError):
            outage_capacity(fig1, ctx, 2.0, mapping="other")

    def test_monotone(self, fig1):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, 10.0)
        p = [outage_probability(fig1, ctx, t) for t in np.linspace(0.01, 60, 100)]
        assert np.all(np.diff(p) >= -1e-12)
        q = [outage_probability(fig1, SnrContext.from_gamma_bar_db(FIG1_EQUAL, g), 3.0) for g in range(-10, 31, 2)]
        assert np.all(np.diff(q) <= 1e-12)

    @pytest.mark.parametrize("model", [RAYLEIGH, FIG1_EQUAL, rician(5.0)], ids=model_id)
    def test_asymptote(self, model):
        s = auto_truncate(model, 1e-8)
        ctx = SnrContext.from_gamma_bar(model, 1e4)
        exact = outage_probability(s, ctx, 1.0)
        assert outage_asymptote(s, ctx, 1.0) == pytest.approx(exact, rel=0.05)
        assert outage_asymptote(s, ctx, 1.0, verbatim=True) == pytest.approx(exact, rel=0.05)

    def test_asymptote_rayleigh_leading_term(self, ray):
        ctx = SnrContext.from_gamma_bar(RAYLEIGH, 100.0)
        assert outage_asymptote(ray, ctx, 1.0) == pytest.approx(0.01, rel=1e-2)
        with pytest.raises(DomainError):
            outage_asymptote(ray, ctx, 100.0)


class TestBer:
    def test_rayleigh_bpsk(self, ray, oracles):
        ctx = SnrContext.from_gamma_bar(RAYLEIGH, 10.0)
        exact = 0.5 * (1 - math.sqrt(10 / 11))
        assert average_ber(ray, ctx, BPSK) == pytest.approx(exact, abs=1e-12)
        assert exact == pytest.approx(oracles["rayleigh_bpsk_gbar10"], rel=1e-12)
        assert average_ber_closed_form(ray, ctx, BPSK) == pytest.approx(exact, abs=1e-10)

    def test_low_snr_limit(self, fig1):
        ctx = SnrContext.from_gamma_bar(FIG1_EQUAL, 1e-8)
        assert average_ber(fig1, ctx, BPSK) == pytest.approx(0.5, abs=1e-4)

    @pytest.mark.parametrize("scheme", [BPSK, BFSK], ids=lambda s: s.name)
    @pytest.mark.parametrize("gdb", [0.0, 15.0, 30.0])
    def test_against_quadrature(self, fig1, scheme, gdb):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, gdb)
        assert average_ber(fig1, ctx, scheme) == pytest.approx(average_ber_quadrature(fig1, ctx, scheme), abs=1e-8)

    def test_decreasing(self, fig1):
        v = [average_ber(fig1, SnrContext.from_gamma_bar_db(FIG1_EQUAL, g), QPSK) for g in range(0, 41, 2)]
        assert np.all(np.diff(v) < 0)
        assert all(0 <= x <= QPSK.max_ber for x in v)

    def test_closed_form_selection(self, fig1):
        ctx = SnrContext.from_gamma_bar_db(FIG1_EQUAL, 10.0)
        diag = {}
        value = average_ber_closed_form(fig1, ctx, BPSK, diagnostics=diag)
        assert diag["selected"] == "variant_k+2" and diag["within_1e-6"]
        assert value == diag["variant_k+2"]
        assert diag["published_error"] > 1e-4

    def test_rician_high_snr(self):
        model = ChannelModel.mwgd(solve_magnitudes(10.0, (1,)))
        s = auto_truncate(model, 1e-10, max_order=4000)
        ctx = SnrContext.from_gamma_bar(model, 100.0)
        assert average_ber_closed_form(s, ctx, BPSK) == pytest.approx(average_ber(s, ctx, BPSK), abs=1e-6)

    def test_consistency_error(self, ray):
        with pytest.raises(ConsistencyError):
            average_ber_closed_form(ray, SnrContext.from_gamma_bar(RAYLEIGH, 10.0), BPSK, reference=0.3)


class TestReport:
    def test_link_report(self, ray):
        ctx = SnrContext.from_gamma_bar_db(RAYLEIGH, 0.0)
        rep = link_report(ray, ctx, gamma_th=1.0, schemes=(BPSK, QPSK))
        assert rep.capacity_bits_per_hz == pytest.approx(0.8603, abs=5e-5)
        assert rep.outage_prob == pytest.approx(1 - 1 / math.e, abs=1e-12)
        assert rep.snr_moments == pytest.approx([1, 2, 6, 24], rel=1e-12)
        d = json.loads(rep.to_json())
        assert list(d) == [
            "gamma_bar_db", "gamma_th", "r_th", "mean_snr", "snr_moments", "amount_of_fading", "cqei",
            "capacity_bits_per_hz", "outage_prob", "outage_capacity_prob", "avg_ber",
        ]
        assert list(d["avg_ber"]) == ["BPSK", "QPSK"]
        assert len(rep.csv_header().split(",")) == len(rep.csv_row().split(","))

    def test_invariants(self):
        with pytest.raises(ConsistencyError):
            LinkReport(0, 1, 1, 1, [1], 1, 1, 1, 1.5, 0.5)
        with pytest.raises(ConsistencyError):
            LinkReport(0, 1, 1, 1, [1], 1, 1, -1, 0.5, 0.5)

    def test_verbatim_report(self, fig1):
        rep = verbatim_report(fig1, SnrContext.from_gamma_bar_db(FIG1_EQUAL, 10.0))
        assert rep["snr_moments"][1]["ratio"] == pytest.approx(2.0)
        assert rep["amount_of_fading"]["corrected"] == pytest.approx(1 + 2 * rep["amount_of_fading"]["published"])
        assert rep["ber_closed_form"]["selected"] == "variant_k+2"
