import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=150,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_file(name: str) -> str:
    return os.path.join(DATA, name)


@st.composite
def base_probabilities(draw, min_atoms=1, max_atoms=5, den=12):
    n = draw(st.integers(min_atoms, max_atoms))
    cuts = sorted(draw(st.lists(st.integers(0, den), min_size=n - 1, max_size=n - 1)))
    pts = [0] + cuts + [den]
    return tuple(Fraction(pts[i + 1] - pts[i], den) for i in range(n))


def rationals(lo, hi, den=24):
    return st.integers(int(lo * den), int(hi * den)).map(lambda k: Fraction(k, den))


@pytest.fixture(params=["python", "cython"])
def backend(request):
    from nlum import kernels

    if request.param == "cython" and kernels.compiled_kernels is None:
        pytest.skip("compiled kernels not built")
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
