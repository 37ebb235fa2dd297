import numpy as np
import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def _report(criterion, passed, detail=""):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        _ACCEPTANCE_LINES.append(f"[{status}] {criterion}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    A = rng.standard_normal((n, rank))
    K = A @ A.T
    return 0.5 * (K + K.T)


def random_labeled(rng, N, C, D, shift=2.0):
    """Random features with every class present and class-dependent offsets."""
    labels = np.concatenate([np.arange(C), rng.integers(0, C, N - C)])
    rng.shuffle(labels)
    centers = shift * rng.standard_normal((C, D))
    X = centers[labels] + rng.standard_normal((N, D))
    return X, labels
