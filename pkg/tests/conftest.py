import json
from pathlib import Path

import pytest

from fadinglab import ChannelModel, solve_magnitudes

ORACLES = json.loads((Path(__file__).parent / "oracles" / "oracles.json").read_text())

# (number, line) records filled by the acceptance tests
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


def sweep_models(kinds=("mwgd", "fmr"), n_values=range(5), k_db=(0.0, 5.0, 10.0, 15.0), m_values=(1, 2, 3), ms_values=(3.0, 10.0, 1e4)):
    """The parameter sweep used across the acceptance criteria.

    Equal-magnitude rays scaled to the power ratio; N = 0 appears once
    per m (the ratio is undefined without rays).
    """
    out = []
    for n in n_values:
        for k in (k_db if n else (None,)):
            spec = solve_magnitudes(k, [1.0] * n) if n else ()
            for m in m_values:
                if "mwgd" in kinds:
                    out.append(ChannelModel.mwgd(spec, m, 1.0))
                if "fmr" in kinds and n:
                    for ms in ms_values:
                        out.append(ChannelModel.fmr(spec, ms, m, 1.0))
    return out


def model_id(model):
    v = ",".join(f"{x:.3g}" for x in model.specular)
    extra = f",ms={model.m_s:g}" if model.m_s is not None else ""
    return f"{model.kind.value}[{v}]m={model.m:g}{extra}"
