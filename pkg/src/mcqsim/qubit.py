"""Single-cluster Hamiltonians, rotating-frame gates and lab-frame dynamics.

Energies follow ``E(m) = -K m^2 - sign * g * B0 * m`` where ``g`` is the
Zeeman coefficient in meV/T and ``sign`` selects between the two Zeeman
conventions found in the literature (``+1`` puts the ground state at
``m = +S`` for positive ``B0``).

Gate conventions
----------------
``X(a) = exp(-i a P(Sx))`` and ``Y(a) = exp(-i a P(Sy))`` with ``P`` the
restriction to ``{|S>, |S-1>}``.  ``Y`` is driven at phase ``pi/2``.  Since
``P(Sx) = sqrt(2S)/2 * sigma_x``, ``X(a)`` is a Bloch rotation by
``a * sqrt(2S)``.  The composite ``Z(a) = X(b) Y(a/sqrt(2S)) X(b)^dag`` with
``b = pi / (2 sqrt(2S))`` equals ``diag(exp(-i a/2), exp(i a/2))``, so
``<0|Z|0> / <1|Z|1> = exp(-i a)``.

A linearly polarised drive ``g B1 cos(w t - phi) Sx`` keeps only half its
amplitude after the rotating wave approximation.  ``pulse_duration`` returns
the lab-frame time for a given rotation (``2 a / w1``), while ``gate_time``
keeps the conventional ``sqrt(1/2S) * pi / w1``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import HBAR
from .spin import SpinValue, expm, project_two_level, spin_operators

__all__ = [
    "ClusterParams",
    "EnergyLevel",
    "IntegrationError",
    "LabFrameResult",
    "level_energy",
    "static_hamiltonian",
    "energy_table",
    "larmor_frequency",
    "rabi_frequency",
    "drive_generator",
    "rwa_hamiltonian",
    "rotation",
    "gate_x",
    "gate_y",
    "gate_z",
    "relative_phase",
    "simulate_lab_frame",
    "to_rotating_frame",
    "leakage",
    "pulse_duration",
    "rwa_rotation_angle",
    "gate_time",
]

MAX_DRIFT = 1e-6


class IntegrationError(RuntimeError):
    """Raised when the propagator loses unitarity beyond tolerance."""


@dataclass(frozen=True)
class ClusterParams:
    """Physical constants of one magnetic-cluster qubit.

    Attributes
    ----------
    s : SpinValue
    k_aniso : float
        Uniaxial anisotropy K in meV.
    g : float
        Zeeman coefficient (gamma * hbar) in meV/T.
    b0, b1 : float
        Static and oscillating field amplitudes in T.
    omega_mf : float or None
        Drive angular frequency in rad/ps; ``None`` means resonant.
    zeeman_sign : int
        ``+1`` or ``-1``.
    """

    s: SpinValue
    k_aniso: float
    g: float
    b0: float
    b1: float = 0.0
    omega_mf: float | None = None
    zeeman_sign: int = 1

    def __post_init__(self):
        if not isinstance(self.s, SpinValue):
            object.__setattr__(self, "s", SpinValue.from_value(self.s))
        if not self.k_aniso > 0:
            raise ValueError(f"k_aniso must be > 0, got {self.k_aniso}")
        if self.zeeman_sign not in (1, -1):
            raise ValueError(f"zeeman_sign must be +1 or -1, got {self.zeeman_sign}")
        if self.b1 < 0:
            raise ValueError(f"b1 must be >= 0, got {self.b1}")
        for name in ("k_aniso", "g", "b0", "b1"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_(self, **changes) -> "ClusterParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class EnergyLevel:
    label: str
    m_s: float
    n_electrons: int
    energy: float
    gap: float | None = field(default=None)


def level_energy(p: ClusterParams, m: float) -> float:
    """Energy of the ``|m>`` eigenstate of the static Hamiltonian (meV)."""
    return -p.k_aniso * m * m - p.zeeman_sign * p.g * p.b0 * m


def static_hamiltonian(p: ClusterParams) -> np.ndarray:
    m = p.s.m_values()
    return np.diag([level_energy(p, mi) for mi in m]).astype(complex)


def energy_table(p: ClusterParams, n_levels: int = 3) -> list[EnergyLevel]:
    """Levels ``m = S, S-1, ...`` with the gap to the next level up the list.

    The gap of the last listed level is still reported (it uses ``m - 1``)
    whenever ``m - 1 >= -S``.
    """
    if not 1 <= n_levels <= p.s.dim:
        raise ValueError(f"n_levels must be in 1..{p.s.dim}, got {n_levels}")
    levels = []
    for i in range(n_levels):
        m = p.s.s - i
        e = level_energy(p, m)
        gap = level_energy(p, m - 1) - e if m - 1 >= -p.s.s else None
        levels.append(EnergyLevel(f"|{i}>", m, 0, e, gap))
    return levels


def larmor_frequency(p: ClusterParams) -> float:
    """Qubit splitting ``(E1 - E0) / hbar`` in rad/ps."""
    s = p.s.s
    return (level_energy(p, s - 1) - level_energy(p, s)) / HBAR


def rabi_frequency(p: ClusterParams) -> float:
    """``w1 = g B1 / hbar`` in rad/ps."""
    return p.g * p.b1 / HBAR


def _check_weak_drive(p: ClusterParams):
    gap = larmor_frequency(p) * HBAR
    if not abs(p.g * p.b1) < 0.1 * abs(gap):
        raise ValueError(
            f"drive too strong for the two-level picture: g*B1 = {p.g * p.b1:.4g} meV "
            f"vs 0.1*(E1-E0) = {0.1 * gap:.4g} meV"
        )


def drive_generator(s, phase: float) -> np.ndarray:
    """``cos(phase) P(Sx) + sin(phase) P(Sy)``, the 2x2 drive direction."""
    sx, sy, _ = spin_operators(s)
    return project_two_level(math.cos(phase) * sx + math.sin(phase) * sy, s)


def rwa_hamiltonian(p: ClusterParams, phase: float) -> np.ndarray:
    """Time-independent rotating-frame Hamiltonian ``hbar w1 (cos Sx + sin Sy)``."""
    _check_weak_drive(p)
    return p.g * p.b1 * drive_generator(p.s, phase)


def rotation(s, alpha: float, phase: float = 0.0) -> np.ndarray:
    """``exp(-i alpha (cos(phase) P(Sx) + sin(phase) P(Sy)))``."""
    return expm(-1j * alpha * drive_generator(s, phase))


def gate_x(s, alpha: float) -> np.ndarray:
    return rotation(s, alpha, 0.0)


def gate_y(s, alpha: float) -> np.ndarray:
    return rotation(s, alpha, math.pi / 2)


def gate_z(s, alpha: float) -> np.ndarray:
    """Z rotation assembled from X and Y pulses only."""
    s = s if isinstance(s, SpinValue) else SpinValue.from_value(s)
    root = math.sqrt(s.twice_s)
    b = math.pi / (2 * root)
    xb = gate_x(s, b)
    return xb @ gate_y(s, alpha / root) @ xb.conj().T


def relative_phase(u: np.ndarray) -> complex:
    """``<0|U|0> / <1|U|1>`` for a diagonal 2x2 gate."""
    return complex(u[0, 0] / u[1, 1])


def pulse_duration(p: ClusterParams, alpha: float) -> float:
    """Lab-frame drive time (ps) realising ``rotation(s, alpha, phase)``."""
    w1 = rabi_frequency(p)
    if w1 <= 0:
        raise ValueError("pulse_duration needs b1 * g > 0")
    return 2 * alpha / w1


def rwa_rotation_angle(p: ClusterParams, duration: float) -> float:
    """Rotation angle ``alpha`` reached after driving for ``duration`` ps."""
    return rabi_frequency(p) * duration / 2


def gate_time(p: ClusterParams, alpha: float = math.pi) -> float:
    """Gate operation time ``sqrt(1/2S) * alpha / w1`` in ps."""
    if not p.b1 > 0:
        raise ValueError(f"gate_time needs b1 > 0, got {p.b1}")
    return math.sqrt(1 / p.s.twice_s) * alpha / rabi_frequency(p)


@dataclass(frozen=True)
class LabFrameResult:
    propagator: np.ndarray
    leakage: float
    unitarity_drift: float
    dt: float
    n_steps: int
    duration: float


def leakage(u: np.ndarray) -> float:
    """Worst-case population left outside the qubit subspace.

    Maximised over all normalised initial states in ``span{|S>, |S-1>}``,
    i.e. the largest eigenvalue of ``A^dag A`` for ``A = U[2:, :2]``.
    """
    a = np.asarray(u)[2:, :2]
    if a.size == 0:
        return 0.0
    return float(max(0.0, np.linalg.eigvalsh(a.conj().T @ a)[-1]))


def _unitarity_drift(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def simulate_lab_frame(
    p: ClusterParams,
    duration: float,
    phase: float = 0.0,
    dt: float | None = None,
    picture: str = "interaction",
    max_drift: float = MAX_DRIFT,
) -> LabFrameResult:
    """Propagate ``H(t) = H0 + g B1 cos(w t - phase) Sx`` in the full space.

    Fixed-step RK4 on the Schrodinger equation for the propagator.  With
    ``picture="interaction"`` (default) the diagonal ``H0`` is removed
    exactly and RK4 integrates only the drive term; ``picture="lab"``
    integrates ``H(t)`` directly.  No renormalisation is applied.

    Parameters
    ----------
    duration : float
        Drive time in ps.
    dt : float, optional
        Requested step; defaults to a hundredth of the Larmor period and must
        not exceed a fiftieth.  The step is shrunk slightly so that an
        integer number of steps spans ``duration``.

    Raises
    ------
    IntegrationError
        If ``||U^dag U - I||_max > max_drift``.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if picture not in ("interaction", "lab"):
        raise ValueError(f"unknown picture {picture!r}")
    if p.b1 > 0:
        _check_weak_drive(p)
    w0 = larmor_frequency(p)
    period = 2 * math.pi / abs(w0)
    if dt is None:
        dt = period / 100
    if not 0 < dt <= period / 50:
        raise ValueError(f"dt must be in (0, {period / 50:.6g}] ps, got {dt}")
    w_drive = w0 if p.omega_mf is None else p.omega_mf

    n_steps = max(1, math.ceil(duration / dt - 1e-9)) if duration > 0 else 0
    h = duration / n_steps if n_steps else 0.0

    sx, _, _ = spin_operators(p.s)
    energies = np.real(np.diag(static_hamiltonian(p)))
    d = p.s.dim
    amp = p.g * p.b1 / HBAR
    # Sx is tridiagonal: only the superdiagonal needs to be stored
    coupling = amp * np.real(np.diag(sx, k=1))

    if picture == "interaction":
        w_split = (energies[:-1] - energies[1:]) / HBAR

        def apply(t, u):
            c = math.cos(w_drive * t - phase)
            upper = c * coupling * np.exp(1j * w_split * t)
            out = np.zeros_like(u)
            out[:-1] += upper[:, None] * u[1:]
            out[1:] += upper.conj()[:, None] * u[:-1]
            return -1j * out
    else:
        diag = energies / HBAR

        def apply(t, u):
            c = math.cos(w_drive * t - phase)
            upper = c * coupling
            out = diag[:, None] * u
            out[:-1] += upper[:, None] * u[1:]
            out[1:] += upper[:, None] * u[:-1]
            return -1j * out

    u = np.eye(d, dtype=complex)
    for i in range(n_steps):
        t = i * h
        k1 = apply(t, u)
        k2 = apply(t + h / 2, u + (h / 2) * k1)
        k3 = apply(t + h / 2, u + (h / 2) * k2)
        k4 = apply(t + h, u + h * k3)
        u = u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    if picture == "interaction":
        u = np.exp(-1j * energies * duration / HBAR)[:, None] * u

    drift = _unitarity_drift(u)
    if drift > max_drift:
        raise IntegrationError(f"unitarity drift {drift:.3e} exceeds {max_drift:.1e}; reduce dt")
    return LabFrameResult(u, leakage(u), drift, h, n_steps, duration)


def to_rotating_frame(u_full: np.ndarray, p: ClusterParams, t: float) -> np.ndarray:
    """Apply ``exp(i H0 t / hbar)`` to a lab-frame propagator."""
    energies = np.real(np.diag(static_hamiltonian(p)))
    return np.exp(1j * energies * t / HBAR)[:, None] * np.asarray(u_full)
