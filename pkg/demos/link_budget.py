"""Capacity, outage and BER of the equal-ray channel against Monte Carlo.

A full link report is printed for a few average SNRs, followed by a
Monte Carlo spot check of each analytic number (n = 1e6, 4 standard
errors) and the exact-vs-asymptote outage comparison at high SNR.

Run: python demos/link_budget.py
"""

from fadinglab import (
    BPSK,
    ChannelModel,
    RngSpec,
    SnrContext,
    auto_truncate,
    average_ber,
    ergodic_capacity,
    link_report,
    outage_asymptote,
    outage_probability,
    solve_magnitudes,
)
from fadinglab.mc import metric_function, simulate_ber, simulate_metrics


def main():
    model = ChannelModel.mwgd(solve_magnitudes(10.0, (1, 1, 1)))
    series = auto_truncate(model, 1e-8)
    print(f"series order {series.truncation_order}, tail estimate {series.tail_estimate:.1e}\n")

    print(f"{'gbar dB':>8} {'C bit/s/Hz':>11} {'P_out(1)':>10} {'BER BPSK':>10}")
    for g_db in (0.0, 10.0, 20.0, 30.0):
        rep = link_report(series, SnrContext.from_gamma_bar_db(model, g_db))
        print(f"{g_db:>8g} {rep.capacity_bits_per_hz:>11.5f} {rep.outage_prob:>10.3e} {rep.avg_ber['BPSK']:>10.3e}")

    ctx = SnrContext.from_gamma_bar_db(model, 10.0)
    rng = RngSpec(2024)
    est = simulate_metrics(model, ctx, {"capacity": metric_function("capacity"), "outage(1.0)": metric_function("outage(1.0)")}, rng, 10**6)
    ber = simulate_ber(model, ctx, BPSK, rng, 10**6)
    print("\nMonte Carlo at 10 dB (value, standard error, analytic):")
    for name, mc, exact in (
        ("capacity", est["capacity"], ergodic_capacity(series, ctx)),
        ("outage", est["outage(1.0)"], outage_probability(series, ctx, 1.0)),
        ("BER", ber, average_ber(series, ctx, BPSK)),
    ):
        z = abs(mc.value - exact) / mc.std_error
        print(f"  {name:>8}: {mc.value:.6g} +/- {mc.std_error:.1g} vs {exact:.6g} ({z:.1f} SE)")

    print("\nHigh-SNR outage, threshold 1:")
    for g_db in (20.0, 30.0, 40.0):
        ctx = SnrContext.from_gamma_bar_db(model, g_db)
        exact, asym = outage_probability(series, ctx, 1.0), outage_asymptote(series, ctx, 1.0)
        print(f"  {g_db:g} dB: exact {exact:.4e}, asymptote {asym:.4e}, ratio {asym / exact:.4f}")


if __name__ == "__main__":
    main()
