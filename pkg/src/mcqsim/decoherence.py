"""Spin-phonon leakage rate, decoherence time and gate budget.

The golden-rule rate for one-phonon transitions out of the qubit subspace
is evaluated in SI units::

    Gamma = V / (12 pi hbar) * |Xi|^2 * w^3 * n(w) / (M v^5)

with ``Xi = -i hbar w <f|S|i>`` the spin matrix element.  Two conventions
for ``|Xi|^2`` are offered:

``"exact"``
    ``hbar^2 w^2 |<S-1|Sx|S>|^2 = hbar^2 w^2 (2S)/4``, the single
    ``|S> -> |S-1>`` ladder element.
``"paper"``
    ``hbar^2 S^2 w^2``, the large-spin proportionality used for the
    temperature/spin maps.

With the default sound speed ``v = w * l_c`` and cell volume ``V = l_c^3``
the paper-mode rate collapses to ``hbar S^2 n / (12 pi M l_c^2)``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR, HBAR_SI, KB, MEV_TO_J, PS_TO_S
from .qubit import ClusterParams, gate_time
from .spin import spin_operators

__all__ = [
    "LatticeParams",
    "DecoherenceQuery",
    "XI_MODES",
    "phonon_occupation",
    "spin_matrix_element_sq",
    "anisotropy_commutator_residual",
    "transition_rate",
    "decoherence_time",
    "tau_factorization",
    "ops_budget",
    "fig6_sweep",
    "SWEEP_HEADER",
]

XI_MODES = ("exact", "paper")
SWEEP_HEADER = ("S", "T_K", "tau_s", "log10_tau", "ops_budget")


@dataclass(frozen=True)
class LatticeParams:
    """Unit-cell mass (kg), lattice constant (m), cell volume (m^3), sound speed (m/s).

    ``cell_volume`` defaults to ``lattice_const**3``; ``sound_speed``
    defaults to ``omega_fi * lattice_const`` and is resolved per query.
    """

    cell_mass: float
    lattice_const: float
    cell_volume: float | None = None
    sound_speed: float | None = None

    def __post_init__(self):
        for name in ("cell_mass", "lattice_const", "cell_volume", "sound_speed"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    @property
    def volume(self) -> float:
        return self.lattice_const**3 if self.cell_volume is None else self.cell_volume


@dataclass(frozen=True)
class DecoherenceQuery:
    cluster: ClusterParams
    lattice: LatticeParams
    temperature: float
    omega_fi: float | None = None  # rad/ps; default 2 K S / hbar

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.omega_fi is not None and not self.omega_fi > 0:
            raise ValueError(f"omega_fi must be > 0, got {self.omega_fi}")

    @property
    def omega(self) -> float:
        """Transition angular frequency in rad/ps."""
        if self.omega_fi is not None:
            return self.omega_fi
        return 2 * self.cluster.k_aniso * self.cluster.s.s / HBAR

    @property
    def sound_speed(self) -> float:
        if self.lattice.sound_speed is not None:
            return self.lattice.sound_speed
        return self.omega / PS_TO_S * self.lattice.lattice_const

    def with_(self, **changes) -> "DecoherenceQuery":
        return replace(self, **changes)


def _check_mode(xi_mode: str):
    if xi_mode not in XI_MODES:
        raise ValueError(f"xi_mode must be one of {XI_MODES}, got {xi_mode!r}")


def phonon_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation at ``hbar * omega`` (omega in rad/ps)."""
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    x = HBAR * omega / (KB * temperature)
    # exp(-x) / (1 - exp(-x)) stays finite for large x
    return math.exp(-x) / -math.expm1(-x)


def spin_matrix_element_sq(q: DecoherenceQuery, xi_mode: str = "paper") -> float:
    """``|Xi|^2`` in meV^2."""
    _check_mode(xi_mode)
    hw = HBAR * q.omega
    if xi_mode == "paper":
        return hw * hw * q.cluster.s.s ** 2
    sx, _, _ = spin_operators(q.cluster.s)
    elem = abs(sx[1, 0])
    return hw * hw * elem * elem


def anisotropy_commutator_residual(p: ClusterParams) -> float:
    """Max deviation of ``<f|[H_A, S-]|i>`` from ``(E_f - E_i) <f|S-|i>``.

    ``H_A = -K Sz^2``; the identity underlies the spin matrix element.
    """
    sx, sy, _ = spin_operators(p.s)
    s_minus = sx - 1j * sy
    m = p.s.m_values()
    e = -p.k_aniso * m * m
    h_a = np.diag(e).astype(complex)
    lhs = h_a @ s_minus - s_minus @ h_a
    rhs = (e[:, None] - e[None, :]) * s_minus
    return float(np.max(np.abs(lhs - rhs)))


def transition_rate(q: DecoherenceQuery, xi_mode: str = "paper") -> float:
    """Leakage rate ``Gamma`` in 1/s."""
    _check_mode(xi_mode)
    xi_sq = spin_matrix_element_sq(q, xi_mode) * MEV_TO_J**2
    w = q.omega / PS_TO_S
    n = phonon_occupation(q.omega, q.temperature)
    lat = q.lattice
    return lat.volume / (12 * math.pi * HBAR_SI) * xi_sq * w**3 * n / (lat.cell_mass * q.sound_speed**5)


def decoherence_time(q: DecoherenceQuery, xi_mode: str = "paper") -> float:
    """``tau = 1 / Gamma`` in seconds; ``math.inf`` when the rate vanishes."""
    rate = transition_rate(q, xi_mode)
    return math.inf if rate == 0 else 1.0 / rate


def tau_factorization(q: DecoherenceQuery) -> dict:
    """Split the paper-mode ``tau`` into thermal, inertial and prefactor parts.

    ``tau = prefactor * thermal * inertia`` with ``thermal = exp(hbar w/kT) - 1``
    and ``inertia = M l_c^2 / S^2``.  Under the default lattice the prefactor
    is ``12 pi / hbar``.
    """
    lat = q.lattice
    x = HBAR * q.omega / (KB * q.temperature)
    thermal = math.expm1(x) if x < 700 else math.inf
    S = q.cluster.s.s
    inertia = lat.cell_mass * lat.lattice_const**2 / S**2
    w = q.omega / PS_TO_S
    prefactor = 12 * math.pi * q.sound_speed**5 / (HBAR_SI * lat.volume * w**5 * lat.lattice_const**2)
    return {"thermal": thermal, "inertia": inertia, "prefactor": prefactor}


def ops_budget(q: DecoherenceQuery, xi_mode: str = "paper") -> float:
    """Gate operations per decoherence time, ``tau / tau_g``."""
    tau_g = gate_time(q.cluster) * PS_TO_S
    return decoherence_time(q, xi_mode) / tau_g


def fig6_sweep(base: DecoherenceQuery, s_list, t_grid, xi_mode: str = "paper") -> list[tuple]:
    """Rows ``(S, T_K, tau_s, log10_tau, ops_budget)`` over a spin/temperature grid.

    ``omega_fi`` follows ``2 K S / hbar`` for every spin unless the base query
    pins it.
    """
    t_grid = [float(t) for t in t_grid]
    if any(t <= 0 for t in t_grid) or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be positive and strictly ascending")
    rows = []
    for s in s_list:
        cluster = base.cluster.with_(s=s)
        for t in t_grid:
            q = base.with_(cluster=cluster, temperature=t)
            tau = decoherence_time(q, xi_mode)
            log_tau = math.inf if math.isinf(tau) else math.log10(tau)
            budget = ops_budget(q, xi_mode)
            rows.append((cluster.s.s, t, tau, log_tau, budget))
    return rows

