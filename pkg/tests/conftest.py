import numpy as np
import pytest

from rdacc.motion import RadarParams, TargetTruth
from rdacc.synth import synthesize_echo
from rdacc.waveform import make_costas, make_lfm


@pytest.fixture(scope="session")
def small_rp():
    # 1 ms pulses at 1.25 MHz: 1250-sample pulses, fast enough for unit tests.
    return RadarParams(fc=1.3e9, B=1e6, Tpri=5e-3, Tp=1e-3, Np=8, fs=1.25e6)


@pytest.fixture(scope="session")
def small_lfm(small_rp):
    return make_lfm(small_rp.Tp, small_rp.B, small_rp.fs)


@pytest.fixture(scope="session")
def small_costas(small_rp):
    return make_costas(None, small_rp.Tp, small_rp.B, small_rp.fs)


@pytest.fixture(scope="session")
def linear_target():
    return TargetTruth(150e3, 350.0, 0.0)


@pytest.fixture(scope="session")
def accel_target():
    return TargetTruth(150e3, 350.0, 400.0)


@pytest.fixture(scope="session")
def linear_cube(small_rp, small_lfm, linear_target):
    return synthesize_echo(small_rp, [linear_target], small_lfm)


@pytest.fixture(scope="session")
def accel_cube(small_rp, small_costas, accel_target):
    return synthesize_echo(small_rp, [accel_target], small_costas)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
