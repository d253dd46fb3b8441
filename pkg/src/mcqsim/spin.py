"""Spin-S operators and the small dense matrix algebra used everywhere else.

Operators are plain complex ``numpy`` arrays.  The basis is always ordered
``m = S, S-1, ..., -S`` so that the qubit states ``|0> = |S>`` and
``|1> = |S-1>`` are rows/columns 0 and 1.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

__all__ = [
    "SpinValue",
    "spin_operators",
    "expm",
    "project_two_level",
    "fidelity",
    "is_hermitian",
    "is_unitary",
    "normalize_state",
    "commutator",
]

ATOL = 1e-10


@dataclass(frozen=True)
class SpinValue:
    """Spin quantum number stored as ``2S`` so half-integers are exact."""

    twice_s: int

    def __post_init__(self):
        if isinstance(self.twice_s, bool) or int(self.twice_s) != self.twice_s:
            raise ValueError(f"twice_s must be an integer, got {self.twice_s!r}")
        object.__setattr__(self, "twice_s", int(self.twice_s))
        if self.twice_s < 1:
            raise ValueError(f"twice_s must be >= 1, got {self.twice_s}")

    @classmethod
    def from_value(cls, s):
        """Build from ``S`` given as int, float or ``Fraction`` (e.g. 1.5)."""
        twice = Fraction(s) * 2
        if twice.denominator != 1:
            raise ValueError(f"S must be a multiple of 1/2, got {s!r}")
        return cls(int(twice))

    @property
    def s(self) -> float:
        return self.twice_s / 2

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.twice_s, 2)

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @property
    def is_integer(self) -> bool:
        return self.twice_s % 2 == 0

    def m_values(self) -> np.ndarray:
        """Projections ``S, S-1, ..., -S``."""
        return (self.twice_s - 2 * np.arange(self.dim)) / 2

    def __str__(self):
        return str(self.fraction)


def _as_spin(s) -> SpinValue:
    return s if isinstance(s, SpinValue) else SpinValue.from_value(s)


def spin_operators(s):
    """Return ``(Sx, Sy, Sz)`` for spin ``s`` in the ``m = S..-S`` basis.

    Parameters
    ----------
    s : SpinValue or number
        Spin quantum number.

    Returns
    -------
    tuple of np.ndarray
        Three ``(2S+1, 2S+1)`` complex matrices.

    Examples
    --------
    >>> sx, sy, sz = spin_operators(SpinValue(1))
    >>> sx.real
    array([[0. , 0.5],
           [0.5, 0. ]])
    """
    s = _as_spin(s)
    S = s.s
    m = s.m_values()
    # <m+1|S+|m> sits one row above the diagonal since m decreases with index
    raise_elems = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.diag(raise_elems, k=1).astype(complex)
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential via scaling and squaring (scipy's Pade-13 core)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    return scipy.linalg.expm(a.astype(complex))


def project_two_level(op: np.ndarray, s) -> np.ndarray:
    """Restrict ``op`` to the qubit subspace ``{|S>, |S-1>}``."""
    s = _as_spin(s)
    op = np.asarray(op)
    if op.shape != (s.dim, s.dim):
        raise ValueError(f"operator shape {op.shape} does not match spin {s} (dim {s.dim})")
    return np.array(op[:2, :2], dtype=complex)


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, rtol=0, atol=atol)


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return np.allclose(op.conj().T @ op, np.eye(op.shape[0]), rtol=0, atol=atol)


def fidelity(u: np.ndarray, v: np.ndarray, unitary_atol: float = 1e-8) -> float:
    """Global-phase-insensitive gate fidelity ``|Tr(U^dag V)| / d``.

    Raises
    ------
    ValueError
        If the shapes differ or either input is not unitary within
        ``unitary_atol``.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    for name, op in (("U", u), ("V", v)):
        if not is_unitary(op, atol=unitary_atol):
            raise ValueError(f"{name} is not unitary within {unitary_atol}")
    return float(min(1.0, abs(np.trace(u.conj().T @ v)) / u.shape[0]))


def normalize_state(amplitudes) -> np.ndarray:
    """Return a normalized copy of ``amplitudes`` (sum of |a|^2 equal to 1)."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
