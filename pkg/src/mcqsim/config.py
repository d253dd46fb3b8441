"""Run configuration: flat ``key = value`` files, one key per line.

Values use TOML syntax (numbers, strings, single-line arrays) and ``#``
starts a comment.  Unknown and duplicate keys are rejected, and every error
names the offending line.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .constants import HBAR
from .decoherence import XI_MODES, DecoherenceQuery, LatticeParams
from .entangle import ChainSpec
from .qubit import ClusterParams
from .readout import ReadoutParams
from .spin import SpinValue

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_text", "KEYS"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _positive(v):
    return _number(v) and math.isfinite(v) and v > 0


def _finite(v):
    return _number(v) and math.isfinite(v)


def _nonneg(v):
    return _finite(v) and v >= 0


def _list_of(check):
    return lambda v: isinstance(v, list) and len(v) > 0 and all(check(x) for x in v)


def _int_ge(lo):
    return lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= lo


# key -> (validator, description)
KEYS = {
    "S": (lambda v: _positive(v) and float(2 * v).is_integer(), "positive multiple of 1/2"),
    "twice_s": (_int_ge(1), "integer >= 1"),
    "K": (_positive, "positive number (meV)"),
    "g": (_finite, "number (meV/T)"),
    "B0": (_finite, "number (T)"),
    "B1": (_nonneg, "non-negative number (T)"),
    "omega_mf": (_positive, "positive number (rad/ps)"),
    "zeeman_sign": (lambda v: v in (1, -1) and not isinstance(v, bool), "+1 or -1"),
    "eps_lumo": (_finite, "number (meV)"),
    "J_lumo": (_nonneg, "non-negative number (meV)"),
    "u_ee": (_finite, "number (meV)"),
    "g_e": (_finite, "number (meV/T)"),
    "cell_mass": (_positive, "positive number (kg)"),
    "lattice_const": (_positive, "positive number (m)"),
    "cell_volume": (_positive, "positive number (m^3)"),
    "sound_speed": (_positive, "positive number (m/s)"),
    "temperature": (_positive, "positive number (K)"),
    "omega_fi": (_positive, "positive number (rad/ps)"),
    "xi_mode": (lambda v: v in XI_MODES, "one of " + ", ".join(XI_MODES)),
    "chain_size": (_int_ge(1), "integer >= 1"),
    "chain_couplings": (_list_of(_nonneg), "list of non-negative numbers (meV)"),
    "chain_B0": (_list_of(_finite), "list of numbers (T)"),
    "route_control": (_int_ge(0), "integer >= 0"),
    "route_target": (_int_ge(0), "integer >= 0"),
    "gate_angles": (_list_of(_finite), "list of numbers (rad)"),
    "sim_angle": (_finite, "number (rad)"),
    "sim_phase": (_finite, "number (rad)"),
    "sim_duration": (_positive, "positive number (ps)"),
    "sim_dt": (_positive, "positive number (ps)"),
    "sim_max_drift": (_positive, "positive number"),
    "readout_v_max": (_finite, "number (meV)"),
    "readout_v_min": (_finite, "number (meV)"),
    "readout_points": (_int_ge(2), "integer >= 2"),
    "init_T": (_list_of(_positive), "list of positive numbers (K)"),
    "init_levels": (_int_ge(1), "integer >= 1"),
    "sweep_S": (_list_of(lambda v: _positive(v) and float(2 * v).is_integer()), "list of multiples of 1/2"),
    "sweep_T": (_list_of(_positive), "ascending list of positive numbers (K)"),
}

REQUIRED = ("K", "g", "B0", "B1")

DEFAULTS = {
    "zeeman_sign": 1,
    "eps_lumo": 0.0,
    "J_lumo": 0.01,
    "u_ee": 0.0,
    "cell_mass": 1.66e-25,
    "lattice_const": 3e-10,
    "temperature": 2.0,
    "xi_mode": "paper",
    "chain_size": 3,
    "gate_angles": [math.pi / 2, math.pi],
    "sim_phase": 0.0,
    "sim_max_drift": 1e-6,
    "readout_points": 201,
    "init_T": [1.0, 2.0, 4.0, 10.0],
    "init_levels": 3,
    "sweep_S": [5, 10, 20, 40],
    "sweep_T": [0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0],
}


@dataclass(frozen=True)
class RunConfig:
    cluster: ClusterParams
    readout: ReadoutParams
    lattice: LatticeParams
    chain: ChainSpec
    temperature: float
    omega_fi: float | None
    xi_mode: str
    route_control: int
    route_target: int
    gate_angles: tuple
    sim_angle: float
    sim_phase: float
    sim_duration: float | None
    sim_dt: float | None
    sim_max_drift: float
    readout_v_max: float | None
    readout_v_min: float | None
    readout_points: int
    init_T: tuple
    init_levels: int
    sweep_S: tuple
    sweep_T: tuple
    echo: tuple = field(default_factory=tuple)  # (key, value, source) for the report

    @property
    def decoherence_query(self) -> DecoherenceQuery:
        return DecoherenceQuery(self.cluster, self.lattice, self.temperature, self.omega_fi)

    @property
    def cnot_coupling(self) -> float:
        return self.chain.couplings[0] if self.chain.couplings else 0.01


def _read_lines(text: str) -> dict:
    """``key -> (value, line)``; rejects duplicates, unknown keys and tables."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            raise ConfigError("tables are not supported; use flat 'key = value' lines", lineno)
        try:
            parsed = tomllib.loads(raw)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {stripped!r}: {exc}", lineno) from None
        if len(parsed) != 1:
            raise ConfigError(f"expected exactly one 'key = value' on the line, got {stripped!r}", lineno)
        ((key, value),) = parsed.items()
        if isinstance(value, dict):
            raise ConfigError(f"dotted keys are not supported: {stripped!r}", lineno, key)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {values[key][1]})", lineno, key)
        check, desc = KEYS[key]
        if not check(value):
            raise ConfigError(f"{key} must be {desc}, got {value!r}", lineno, key)
        values[key] = (value, lineno)
    return values


def parse_config_text(text: str, overrides: dict | None = None) -> RunConfig:
    raw = _read_lines(text)
    for key, value in (overrides or {}).items():
        check, desc = KEYS[key]
        if not check(value):
            raise ConfigError(f"{key} must be {desc}, got {value!r}", key=key)
        raw[key] = (value, None)

    echo = []

    def get(key, default=None):
        if key in raw:
            value, line = raw[key]
            echo.append((key, value, "config" if line is not None else "override"))
            return value
        if key in DEFAULTS:
            default = DEFAULTS[key]
        echo.append((key, default, "default"))
        return default

    def line_of(key):
        return raw[key][1] if key in raw else None

    if ("S" in raw) == ("twice_s" in raw):
        raise ConfigError("exactly one of 'S' or 'twice_s' must be given", line_of("twice_s"))
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", key=key)

    spin_key = "S" if "S" in raw else "twice_s"
    spin_val = get(spin_key)
    try:
        s = SpinValue.from_value(spin_val) if spin_key == "S" else SpinValue(spin_val)
        cluster = ClusterParams(
            s, get("K"), get("g"), get("B0"), get("B1"), get("omega_mf"), get("zeeman_sign")
        )
    except ValueError as exc:
        raise ConfigError(str(exc), line_of(spin_key)) from None

    readout = ReadoutParams(cluster, get("eps_lumo"), get("J_lumo"), get("u_ee"), get("g_e"))
    lattice = LatticeParams(get("cell_mass"), get("lattice_const"), get("cell_volume"), get("sound_speed"))

    n = get("chain_size")
    couplings = get("chain_couplings")
    if couplings is None:
        couplings = [0.01] * (n - 1)
        echo[-1] = ("chain_couplings", couplings, "default")
    if len(couplings) != n - 1:
        raise ConfigError(
            f"chain_couplings has {len(couplings)} entries; a chain of {n} qubits needs {n - 1}",
            line_of("chain_couplings") or line_of("chain_size"),
            "chain_couplings",
        )
    b0s = get("chain_B0")
    if b0s is None:
        b0s = [cluster.b0] * n
    elif len(b0s) != n:
        raise ConfigError(f"chain_B0 has {len(b0s)} entries, expected {n}", line_of("chain_B0"), "chain_B0")
    chain = ChainSpec(tuple(cluster.with_(b0=b) for b in b0s), tuple(couplings))

    control = get("route_control", 0)
    target = get("route_target", n - 1)
    for key, idx in (("route_control", control), ("route_target", target)):
        if idx >= n:
            raise ConfigError(f"{key} = {idx} is outside a {n}-qubit chain", line_of(key), key)
    if control == target and n > 1:
        raise ConfigError("route_control and route_target must differ", line_of("route_target"))

    sim_angle = get("sim_angle")
    if sim_angle is None:
        sim_angle = math.pi / math.sqrt(s.twice_s)
        echo[-1] = ("sim_angle", sim_angle, "default")

    sweep_t = get("sweep_T")
    if any(b <= a for a, b in zip(sweep_t, sweep_t[1:])):
        raise ConfigError("sweep_T must be strictly ascending", line_of("sweep_T"), "sweep_T")

    levels = get("init_levels")
    if levels > s.dim:
        raise ConfigError(f"init_levels = {levels} exceeds 2S+1 = {s.dim}", line_of("init_levels"), "init_levels")

    omega_fi = get("omega_fi")
    if omega_fi is None:
        echo[-1] = ("omega_fi", 2 * cluster.k_aniso * s.s / HBAR, "default (2KS/hbar)")

    return RunConfig(
        cluster=cluster,
        readout=readout,
        lattice=lattice,
        chain=chain,
        temperature=get("temperature"),
        omega_fi=omega_fi,
        xi_mode=get("xi_mode"),
        route_control=control,
        route_target=target,
        gate_angles=tuple(get("gate_angles")),
        sim_angle=sim_angle,
        sim_phase=get("sim_phase"),
        sim_duration=get("sim_duration"),
        sim_dt=get("sim_dt"),
        sim_max_drift=get("sim_max_drift"),
        readout_v_max=get("readout_v_max"),
        readout_v_min=get("readout_v_min"),
        readout_points=get("readout_points"),
        init_T=tuple(get("init_T")),
        init_levels=levels,
        sweep_S=tuple(get("sweep_S")),
        sweep_T=tuple(sweep_t),
        echo=tuple(echo),
    )


def parse_config(path, overrides: dict | None = None) -> RunConfig:
    """Load and validate a configuration file (UTF-8)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config file is not valid UTF-8: {exc}") from None
    return parse_config_text(text, overrides)
