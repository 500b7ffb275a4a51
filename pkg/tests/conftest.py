import numpy as np
import pytest

import ergolab as eg


@pytest.fixture(scope="session")
def shift2():
    return eg.builtin_system("full_shift_2")


@pytest.fixture(scope="session")
def doubling():
    return eg.builtin_system("doubling")


@pytest.fixture(scope="session")
def cat():
    return eg.builtin_system("cat_map")


@pytest.fixture(scope="session")
def t4():
    return eg.builtin_system("t4_model")


@pytest.fixture(scope="session")
def control3():
    return eg.builtin_system("cat_identity_control")


@pytest.fixture(scope="session")
def cat_rate(cat):
    # independent eigenvalue oracle for the golden cat map
    w = np.linalg.eigvals(cat.matrix_f)
    return float(np.log(np.max(np.abs(w))))


@pytest.fixture(scope="session")
def t4_rates(t4):
    """Independent characteristic-polynomial oracle for the 4-d model."""
    coeffs = np.poly(t4.matrix_f)
    lam = np.sort(np.roots(coeffs).real)
    return lam


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import ACCEPT_LINES
    except ImportError:
        return
    if ACCEPT_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPT_LINES:
            terminalreporter.write_line(line)
