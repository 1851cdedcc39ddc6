import numpy as np
import pytest

from causalcomp.gaussian_info import CovarianceModel


def random_correlation(n: int, rng: np.random.Generator, extra: int = 2) -> np.ndarray:
    """Random ``2n x 2n`` correlation matrix (Wishart draw, rescaled)."""
    a = rng.standard_normal((2 * n, 2 * n + extra))
    c = a @ a.T
    s = np.sqrt(np.diag(c))
    c = c / np.outer(s, s)
    np.fill_diagonal(c, 1.0)
    return c


def entropy_oracle(m: np.ndarray, idx) -> float:
    """Gaussian entropy without the constant, ``1/2 log det`` via ``slogdet``."""
    idx = list(idx)
    if not idx:
        return 0.0
    sign, logdet = np.linalg.slogdet(m[np.ix_(idx, idx)])
    assert sign > 0
    return 0.5 * logdet


def cmi_oracle(m: np.ndarray, a, b, c=()) -> float:
    """``I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`` from joint entropies only."""
    a, b, c = list(a), list(b), list(c)
    return (
        entropy_oracle(m, a + c)
        + entropy_oracle(m, b + c)
        - entropy_oracle(m, a + b + c)
        - entropy_oracle(m, c)
    )


def f1(pred, true) -> float:
    pred, true = set(pred), set(true)
    if not pred and not true:
        return 1.0
    return 2 * len(pred & true) / (len(pred) + len(true))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def model_factory(rng):
    def make(n: int) -> CovarianceModel:
        return CovarianceModel(random_correlation(n, rng))

    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        passed, detail = results[k]
        terminalreporter.write_line(f"criterion {k} ({mod.NAMES[k]}): {'PASS' if passed else 'FAIL'} {detail}")
