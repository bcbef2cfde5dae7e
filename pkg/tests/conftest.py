import warnings

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

from orgdyn import OrgParams, Regime, critical_desertion, regime
from orgdyn.analysis import denominator

hypothesis.settings.register_profile("default", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.load_profile("default")

REPRESENTATIVE = dict(p=0.1, r=0.25, m=10.0, b=2.0, k=5.0, d_L=0.3, d_F=0.3)


@pytest.fixture
def rep():
    return OrgParams(**REPRESENTATIVE)


def random_params(rng, uniform=True, saddle=True, interior=False, margin=0.05, forcing=True):
    """Draw valid params; rejection-sample until the requested regime holds.

    ``interior`` additionally asks for a fixed point inside the first quadrant;
    ``margin`` keeps the saddle denominator away from zero.
    """
    from orgdyn import fixed_point

    while True:
        p = rng.uniform(0.01, 1.0)
        r = rng.uniform(0.05, 1.0)
        m = rng.uniform(1.1, 20.0)
        b = rng.uniform(0.1, 10.0) if forcing else 0.0
        k = rng.uniform(0.1, 20.0) if forcing else 0.0
        dc = critical_desertion(p, r, m)
        if uniform:
            d_L = d_F = rng.uniform(0.0, 0.95 * dc)
        else:
            d_L, d_F = rng.uniform(0.0, 1.2 * dc, size=2)
        params = OrgParams(p, r, m, b, k, d_L, d_F)
        if saddle:
            if regime(params) is not Regime.SADDLE or denominator(params) < margin * r * m * p:
                continue
            if interior and fixed_point(params).negative:
                continue
        return params


@st.composite
def saddle_params(draw, uniform=None, forcing=True):
    p = draw(st.floats(0.01, 1.0))
    r = draw(st.floats(0.05, 1.0))
    m = draw(st.floats(1.1, 20.0))
    b = draw(st.floats(0.0, 10.0)) if forcing else 0.0
    k = draw(st.floats(0.0, 20.0)) if forcing else 0.0
    dc = critical_desertion(p, r, m)
    split = draw(st.booleans()) if uniform is None else not uniform
    if split:
        d_L = draw(st.floats(0.0, 1.2 * dc))
        d_F = draw(st.floats(0.0, 1.2 * dc))
    else:
        d_L = d_F = draw(st.floats(0.0, 0.95 * dc))
    params = OrgParams(p, r, m, b, k, d_L, d_F)
    hypothesis.assume(regime(params) is Regime.SADDLE)
    hypothesis.assume(denominator(params) > 0.02 * r * m * p)
    return params


@pytest.fixture(autouse=True)
def _quiet_low_m_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=UserWarning)
        yield


# acceptance summary, one line per criterion, printed at the end of the run
_ACCEPTANCE = []


@pytest.fixture
def criterion():
    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title} {detail}")
