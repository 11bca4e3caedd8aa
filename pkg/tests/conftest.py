import numpy as np
import pytest

from qcprog import models
from qcprog.program import Program
from qcprog.superop import SuperOperator

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def walk():
    return models.walk()


@pytest.fixture
def flip():
    return models.flip()


@pytest.fixture
def idle():
    return models.identity()


def const_program(d=2, m=1, m1=None, kraus=None):
    """Every process is the same channel (identity by default)."""
    e = SuperOperator(kraus if kraus is not None else [np.eye(d)])
    m1 = np.eye(d) if m1 is None else np.asarray(m1, dtype=complex)
    # any M0 with M0^dag M0 = I - M1^dag M1
    w, v = np.linalg.eigh(np.eye(d) - m1.conj().T @ m1)
    m0 = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    return Program(tuple(e for _ in range(m)), m0, m1)


def e(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def random_psd(d, rng, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return a @ a.conj().T
