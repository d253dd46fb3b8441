"""Two-qubit interaction, C-NOT pulse compilation and chain routing.

Qubit 0 is the most significant factor of the ``2**n`` basis, so for two
qubits the order is ``|00>, |01>, |10>, |11>``.  Qubit indices are
0-based.  Programs list instructions in the order they are applied.

C-NOT compilation
-----------------
For two equal spins ``S`` coupled by ``-J Sz1 Sz2``, waiting ``pi hbar / J``
gives ``CZ`` dressed by a local ``Rz(-pi S)`` on both qubits.  The compiled
block is (time order)::

    RZ  control  pi/2 + c
    RZ  target   pi/2 + c
    RX  target   kappa*pi/2   (drive phase c)
    ZZ_WAIT      pi*hbar/J
    RY  target   kappa*pi/2

with ``kappa = sqrt(1/2S)`` and ``c = pi (S - 1/2) mod 2 pi``.  For
``S = 1/2`` the correction ``c`` vanishes and the block reduces to the
textbook ``Y2 U X2 Z2 Z1`` sequence, equal to ``exp(-i pi/4) CNOT``.  For
other spins ``c`` removes the extra local phase of the wait; moving it
through the X pulse turns it into the drive phase.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .qubit import ClusterParams, gate_z, larmor_frequency, rotation
from .spin import SpinValue

__all__ = [
    "KINDS",
    "PulseInstruction",
    "PulseProgram",
    "ChainSpec",
    "interaction_unitary",
    "interaction_closed_form",
    "interaction_crosscheck",
    "cnot_correction_phase",
    "compile_cnot",
    "expand_z",
    "compose",
    "inverse_program",
    "route_blocks",
    "route_cnot",
    "ideal_cnot",
    "MAX_COMPOSE_QUBITS",
]

KINDS = ("RX", "RY", "RZ", "ZZ_WAIT")
MAX_COMPOSE_QUBITS = 10


def _spin(s) -> SpinValue:
    return s if isinstance(s, SpinValue) else SpinValue.from_value(s)


@dataclass(frozen=True)
class PulseInstruction:
    """One primitive: a rotation on ``target`` or a ZZ wait on ``(target, target+1)``.

    ``angle`` is in the units of ``X(angle)``/``Y(angle)``/``Z(angle)``.
    ``phase`` offsets the drive axis of RX/RY pulses; RX at phase ``p`` rotates
    about ``cos(p) Sx + sin(p) Sy`` and RY about the axis a quarter turn
    further.  ``duration`` (ps) is used by ZZ_WAIT only.
    """

    kind: str
    target: int
    angle: float = 0.0
    duration: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        if int(self.target) != self.target or self.target < 0:
            raise ValueError(f"target must be a non-negative integer, got {self.target!r}")
        if not (math.isfinite(self.angle) and math.isfinite(self.phase) and math.isfinite(self.duration)):
            raise ValueError("instruction values must be finite")
        if self.kind == "ZZ_WAIT" and not self.duration > 0:
            raise ValueError(f"ZZ_WAIT duration must be > 0, got {self.duration}")

    def to_line(self) -> str:
        value = self.duration if self.kind == "ZZ_WAIT" else self.angle
        return f"{self.kind} {self.target} {float(value)!r} {float(self.phase)!r}"

    @classmethod
    def from_line(cls, line: str) -> "PulseInstruction":
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"expected 'KIND target value phase', got {line!r}")
        kind, target, value, phase = parts
        value, phase = float(value), float(phase)
        if kind == "ZZ_WAIT":
            return cls(kind, int(target), duration=value, phase=phase)
        return cls(kind, int(target), angle=value, phase=phase)


@dataclass(frozen=True)
class PulseProgram:
    instructions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        return PulseProgram(self.instructions + other.instructions)

    def to_text(self) -> str:
        """One instruction per line: ``KIND target angle_or_duration phase``."""
        return "".join(ins.to_line() + "\n" for ins in self.instructions)

    @classmethod
    def from_text(cls, text: str) -> "PulseProgram":
        out = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.append(PulseInstruction.from_line(line))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(tuple(out))


@dataclass(frozen=True)
class ChainSpec:
    """Linear chain of qubits with nearest-neighbour couplings (meV).

    A coupling of 0 marks a missing link; routing across it fails.
    """

    qubits: tuple
    couplings: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplings", tuple(float(j) for j in self.couplings))
        if not self.qubits:
            raise ValueError("chain needs at least one qubit")
        if len(self.couplings) != len(self.qubits) - 1:
            raise ValueError(
                f"chain of {len(self.qubits)} qubits needs {len(self.qubits) - 1} couplings, "
                f"got {len(self.couplings)}"
            )
        for i, j in enumerate(self.couplings):
            if not (math.isfinite(j) and j >= 0):
                raise ValueError(f"coupling J[{i},{i + 1}] must be finite and >= 0, got {j}")

    @classmethod
    def uniform(cls, params: ClusterParams, n: int, j: float) -> "ChainSpec":
        return cls((params,) * n, (j,) * (n - 1))

    def __len__(self):
        return len(self.qubits)

    def rwa_ratios(self) -> list[float]:
        """``hbar |w0_i - w0_{i+1}| / J`` for each coupled pair."""
        out = []
        for i, j in enumerate(self.couplings):
            dw = abs(larmor_frequency(self.qubits[i]) - larmor_frequency(self.qubits[i + 1]))
            out.append(math.inf if j == 0 else HBAR * dw / j)
        return out

    def rwa_warnings(self, threshold: float = 20.0) -> list[str]:
        return [
            f"pair ({i},{i + 1}): hbar|dw0|/J = {r:.3g} < {threshold:g}; "
            "secular approximation of the coupling is questionable"
            for i, r in enumerate(self.rwa_ratios())
            if r < threshold
        ]


def _pair_products(s1: SpinValue, s2: SpinValue) -> np.ndarray:
    m1 = (s1.s, s1.s - 1)
    m2 = (s2.s, s2.s - 1)
    return np.array([a * b for a in m1 for b in m2])


def interaction_unitary(s1, s2, j: float, t: float) -> np.ndarray:
    """``exp(-i t (-J Sz1 Sz2) / hbar)`` on the two-qubit subspace (4x4, diagonal)."""
    if not j > 0:
        raise ValueError(f"coupling must be > 0, got {j}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    theta = j * t / HBAR
    return np.diag(np.exp(1j * theta * _pair_products(_spin(s1), _spin(s2))))


def interaction_closed_form(s1, s2) -> np.ndarray:
    """The printed diagonal of the wait at ``t = pi hbar / J``."""
    S, T = _spin(s1).s, _spin(s2).s
    ph = [S * T, -(S * T - S), -(S * T - T), S * T - S - T + 1]
    return np.diag(np.exp(1j * math.pi * np.array(ph)))


def interaction_crosscheck(s1, s2, j: float = 1.0) -> dict:
    """Compare direct exponentiation with the printed diagonal.

    Half-integer spins are flagged: there the printed negative exponents
    differ from direct exponentiation by a sign on some entries.
    """
    s1, s2 = _spin(s1), _spin(s2)
    direct = np.diag(interaction_unitary(s1, s2, j, math.pi * HBAR / j))
    printed = np.diag(interaction_closed_form(s1, s2))
    return {
        "s1": s1.s,
        "s2": s2.s,
        "max_abs_diff": float(np.max(np.abs(direct - printed))),
        "half_integer": not (s1.is_integer and s2.is_integer),
    }


def cnot_correction_phase(s) -> float:
    """``pi (S - 1/2)`` reduced to ``[0, 2 pi)``."""
    s = _spin(s)
    quarter_turns = (s.twice_s - 1) % 4  # (S - 1/2) mod 2 in units of 1/2
    return math.pi * quarter_turns / 2


def compile_cnot(s, j: float, control: int = 0, target: int = 1) -> PulseProgram:
    """Pulse block for a C-NOT between two adjacent qubits of equal spin.

    Returns the five-instruction abstract form (Z rotations not yet
    expanded).  Its composition equals ``CNOT(control -> target)`` up to a
    global phase.
    """
    s = _spin(s)
    if not j > 0:
        raise ValueError(f"coupling must be > 0, got {j}")
    if abs(control - target) != 1:
        raise ValueError(f"compile_cnot needs adjacent qubits, got {control} and {target}")
    kappa = math.sqrt(1 / s.twice_s)
    c = cnot_correction_phase(s)
    z = math.pi / 2 + c
    return PulseProgram(
        (
            PulseInstruction("RZ", control, angle=z),
            PulseInstruction("RZ", target, angle=z),
            PulseInstruction("RX", target, angle=kappa * math.pi / 2, phase=c),
            PulseInstruction("ZZ_WAIT", min(control, target), duration=math.pi * HBAR / j),
            PulseInstruction("RY", target, angle=kappa * math.pi / 2),
        )
    )


def _spins_for(spins, n_needed: int):
    if isinstance(spins, ChainSpec):
        return [q.s for q in spins.qubits]
    if isinstance(spins, (SpinValue, int, float)):
        return [_spin(spins)] * n_needed
    return [_spin(x) for x in spins]


def expand_z(prog: PulseProgram, spins) -> PulseProgram:
    """Rewrite every RZ as ``RX(-b), RY(a / sqrt(2S)), RX(b)``, ``b = pi / (2 sqrt(2S))``."""
    n_needed = 1 + max((ins.target for ins in prog), default=0)
    spin_of = _spins_for(spins, n_needed)
    out = []
    for ins in prog:
        if ins.kind != "RZ":
            out.append(ins)
            continue
        root = math.sqrt(spin_of[ins.target].twice_s)
        b = math.pi / (2 * root)
        out += [
            PulseInstruction("RX", ins.target, angle=-b),
            PulseInstruction("RY", ins.target, angle=ins.angle / root),
            PulseInstruction("RX", ins.target, angle=b),
        ]
    return PulseProgram(tuple(out))


def _gate_matrix(ins: PulseInstruction, s: SpinValue) -> np.ndarray:
    if ins.kind == "RX":
        return rotation(s, ins.angle, ins.phase)
    if ins.kind == "RY":
        return rotation(s, ins.angle, math.pi / 2 + ins.phase)
    return gate_z(s, ins.angle)


def compose(prog: PulseProgram, chain: ChainSpec) -> np.ndarray:
    """Unitary of ``prog`` on the ``2**n`` qubit space of ``chain``."""
    n = len(chain)
    if n > MAX_COMPOSE_QUBITS:
        raise ValueError(f"compose supports at most {MAX_COMPOSE_QUBITS} qubits, chain has {n}")
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for ins in prog:
        q = ins.target
        if ins.kind == "ZZ_WAIT":
            if q + 1 >= n:
                raise ValueError(f"ZZ_WAIT on ({q},{q + 1}) is outside a {n}-qubit chain")
            j = chain.couplings[q]
            if j == 0:
                raise ValueError(f"ZZ_WAIT on uncoupled pair ({q},{q + 1})")
            phases = np.diag(interaction_unitary(chain.qubits[q].s, chain.qubits[q + 1].s, j, ins.duration))
            shape = [1] * (n + 1)
            shape[q] = shape[q + 1] = 2
            u = u * phases.reshape(2, 2).reshape(shape)
        else:
            if q >= n:
                raise ValueError(f"target {q} is outside a {n}-qubit chain")
            g = _gate_matrix(ins, chain.qubits[q].s)
            u = np.moveaxis(np.tensordot(g, u, axes=([1], [q])), 0, q)
    return u.reshape(dim, dim)


def inverse_program(prog: PulseProgram, chain: ChainSpec) -> PulseProgram:
    """Instruction-wise inverse: reversed order, angles negated, waits complemented.

    A wait of ``t`` is replaced by ``P - t`` where ``P`` is the wait period
    after which the coupling phases repeat up to a global phase
    (``2 pi hbar / J`` for integer spins, twice that otherwise).
    """
    out = []
    for ins in reversed(prog.instructions):
        if ins.kind != "ZZ_WAIT":
            out.append(PulseInstruction(ins.kind, ins.target, angle=-ins.angle, phase=ins.phase))
            continue
        q = ins.target
        both_int = chain.qubits[q].s.is_integer and chain.qubits[q + 1].s.is_integer
        period = 2 * math.pi * HBAR / chain.couplings[q] * (1 if both_int else 2)
        rest = period - math.fmod(ins.duration, period)
        if rest > 0 and not math.isclose(rest, period, rel_tol=1e-15):
            out.append(PulseInstruction("ZZ_WAIT", q, duration=rest))
    return PulseProgram(tuple(out))


def route_blocks(control: int, target: int) -> list[tuple[int, int]]:
    """Adjacent ``(control, target)`` C-NOT blocks in application order.

    Uses ``C(t <- c) = C(t <- m) C(m <- c) C(t <- m) C(m <- c)`` with ``m`` the
    neighbour of ``c`` towards ``t``, applied recursively to ``C(t <- m)``.
    """
    if control == target:
        raise ValueError("control and target must differ")
    if abs(control - target) == 1:
        return [(control, target)]
    m = control + (1 if target > control else -1)
    inner = route_blocks(m, target)
    return [(control, m)] + inner + [(control, m)] + inner


def route_cnot(chain: ChainSpec, control: int, target: int) -> PulseProgram:
    """C-NOT between arbitrary chain qubits built from adjacent blocks."""
    n = len(chain)
    for idx in (control, target):
        if not 0 <= idx < n:
            raise ValueError(f"qubit index {idx} is outside a {n}-qubit chain")
    lo, hi = sorted((control, target))
    for i in range(lo, hi):
        if chain.couplings[i] == 0:
            raise ValueError(f"disconnected chain: no coupling between qubits {i} and {i + 1}")
    prog = PulseProgram()
    for c, t in route_blocks(control, target):
        sc, st = chain.qubits[c].s, chain.qubits[t].s
        if sc != st:
            raise NotImplementedError(f"C-NOT between unequal spins {sc} and {st} is not supported")
        prog = prog + compile_cnot(sc, chain.couplings[min(c, t)], c, t)
    return prog


def ideal_cnot(n: int, control: int, target: int) -> np.ndarray:
    """Permutation matrix flipping ``target`` when ``control`` is 1."""
    dim = 2**n
    u = np.zeros((dim, dim))
    for k in range(dim):
        bit = (k >> (n - 1 - control)) & 1
        u[k ^ (bit << (n - 1 - target)), k] = 1
    return u
