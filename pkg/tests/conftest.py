from fractions import Fraction as F

import pytest

from pwc.maps import ModOneFamily, piecewise, reduce_mod_one


def fixture_a_base():
    return piecewise(["3/10", "3/5", "9/10"], ["1/3", "31/60", "1/10", "-7/20"], slope="1/2",
                     validate_images=False)


def two_branch():
    """x -> -x/2 + 1/4 reduced mod 1."""
    return reduce_mod_one(ModOneFamily(piecewise([], ["1/4"], slope="-1/2", validate_images=False), F(0)))


def funnel():
    return piecewise(["1/2"], ["3/5", "7/10"], slope="1/4")


@pytest.fixture
def fixture_a():
    return fixture_a_base()


@pytest.fixture
def two():
    return two_branch()


@pytest.fixture
def funnel_map():
    return funnel()


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
