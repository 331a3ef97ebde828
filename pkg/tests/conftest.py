import numpy as np
import pytest

from locckit import ops
from locckit.measurement import Measurement, ProductKraus, canonicalize


def qubit_kraus_pairs(q: float, eps: float):
    """The four two-qubit Kraus pairs (A_j, B_j) of the repeating family."""
    p0 = ops.projector(0, 2)
    p1 = ops.projector(1, 2)
    flip01 = ops.ketbra(0, 1, 2)
    a = [np.eye(2), np.sqrt(1 - q) * p0, np.sqrt(q) * p0 + p1, np.sqrt(1 - q) * flip01]
    b = [np.sqrt(1 - eps) * p0, np.sqrt(eps) * p0 + p1, np.sqrt(1 - eps) * flip01, np.sqrt(eps) * np.eye(2)]
    return a, b


def qubit_m_eps(q: float, eps: float) -> Measurement:
    a, b = qubit_kraus_pairs(q, eps)
    w = 1.0 / np.sqrt(1.0 - q * eps)
    return canonicalize([ProductKraus(w, (a[j], b[j])) for j in range(4)], (2, 2))


def qubit_m_zero(q: float) -> Measurement:
    a, b = qubit_kraus_pairs(q, 0.0)
    return canonicalize([ProductKraus(1.0, (a[j], b[j])) for j in range(3)], (2, 2))


@pytest.fixture
def m_eps_half_quarter() -> Measurement:
    return qubit_m_eps(0.5, 0.25)


@pytest.fixture
def m_zero_half() -> Measurement:
    return qubit_m_zero(0.5)
