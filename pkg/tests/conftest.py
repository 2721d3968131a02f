import numpy as np
import pytest

from dsgm.divergences import DivergenceSpec, FactorChoice, Form, Variant
from dsgm.entropy import EntropyFamily

# one or two representative parameter points per family; both signs of a - b
FAMILIES = [
    EntropyFamily.shannon(),
    EntropyFamily.tsallis(0.5),
    EntropyFamily.tsallis(1.5),
    EntropyFamily.tsallis(2.0),
    EntropyFamily.kaniadakis(0.3),
    EntropyFamily.kaniadakis(-0.4),
    EntropyFamily.abe(0.8),
    EntropyFamily.abe(1.6),
    EntropyFamily.gamma(0.25),
    EntropyFamily.gamma(-0.3),
    EntropyFamily.kls(0.4, 0.2),
    EntropyFamily.kls(0.3, -0.1),
    EntropyFamily.general(1.5, 0.5),
    EntropyFamily.general(0.5, 1.5),
    EntropyFamily.newton(),
    EntropyFamily.alpha(0.3),
    EntropyFamily.alpha(-0.25),
]

INVARIANT_FAMILIES = [
    f for f in FAMILIES if f.tag.value not in ("newton", "alpha")
] + [EntropyFamily.tsallis(1.0)]

NOMINAL_TS = [0.5, 0.8, 1.5, 2.0, 3.0]


def plain_specs():
    out = []
    for fam in FAMILIES:
        for form in Form:
            if fam.tag.value == "alpha" and form in (Form.BREGMAN, Form.BREGMAN_DUAL):
                continue
            out.append(DivergenceSpec(fam, form))
    return out


def invariant_specs():
    out = []
    for fam in INVARIANT_FAMILIES:
        for form in Form:
            out.append(DivergenceSpec(fam, form, Variant.INVARIANT))
    for t in NOMINAL_TS:
        for form in Form:
            out.append(
                DivergenceSpec(EntropyFamily.tsallis(t), form, Variant.INVARIANT, FactorChoice.NOMINAL)
            )
    return out


PLAIN_SPECS = plain_specs()
INVARIANT_SPECS = invariant_specs()
ALL_SPECS = PLAIN_SPECS + INVARIANT_SPECS


def spec_id(spec):
    return str(spec).replace(" ", "_")


def rand_pair(seed, n=6, low=0.1, high=10.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, n), rng.uniform(low, high, n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance summary: one PASS/FAIL line per criterion at the end of the run
_ACCEPTANCE: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.skipped:
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, [title, True, 0])
    if rep.when == "call":
        entry[2] += 1
    if rep.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, count = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title} ({count} checks)")
