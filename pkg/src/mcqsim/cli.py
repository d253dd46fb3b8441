"""Batch front end.

Usage::

    mcqsim <subcommand> --config run.toml --out results/ [--zeeman-sign -1] [--xi-mode exact]

Every subcommand writes one or more CSV files plus ``report.txt`` into the
output directory.  Exit status is 0 on success, 1 for invalid input and 2
when a numerical quality check fails (e.g. integrator drift).

Pulse programs are written one instruction per line as
``KIND target angle_or_duration phase`` (angles in rad, durations in ps).
"""

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .audit import run_audit
from .config import ConfigError, RunConfig, parse_config
from .constants import HBAR
from .decoherence import (
    SWEEP_HEADER,
    anisotropy_commutator_residual,
    decoherence_time,
    fig6_sweep,
    ops_budget,
    phonon_occupation,
    spin_matrix_element_sq,
    tau_factorization,
    transition_rate,
)
from .entangle import ChainSpec, compile_cnot, compose, expand_z, ideal_cnot, route_blocks, route_cnot
from .qubit import (
    IntegrationError,
    energy_table,
    gate_time,
    gate_x,
    gate_y,
    gate_z,
    larmor_frequency,
    pulse_duration,
    rabi_frequency,
    relative_phase,
    rotation,
    rwa_rotation_angle,
    simulate_lab_frame,
    to_rotating_frame,
)
from .readout import composite_energy, charged_state, crossing_voltages, excited_state, ground_state
from .readout import readout_trace, thermal_populations
from .spin import fidelity, is_unitary, project_two_level

SUBCOMMANDS = ("levels", "gates", "pulse-sim", "cnot", "route", "readout", "init", "decoherence", "sweep", "audit")


def fmt(x) -> str:
    """Round-trip decimal for floats, ``+inf``/``-inf`` for infinities."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            raise ValueError("refusing to emit NaN")
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    _atomic_write(path, buf.getvalue())


class Report:
    def __init__(self, subcommand: str, cfg: RunConfig):
        self.lines = [f"mcqsim {__version__} :: {subcommand}", ""]
        self.lines.append("configuration (key = value  [source])")
        for key, value, source in cfg.echo:
            if value is None:
                continue
            shown = "[" + ", ".join(fmt(v) for v in value) + "]" if isinstance(value, (list, tuple)) else fmt(value)
            self.lines.append(f"  {key} = {shown}  [{source}]")
        self.lines.append("")

    def add(self, line: str = ""):
        self.lines.append(line)

    def write(self, out: Path):
        _atomic_write(out / "report.txt", "\n".join(self.lines) + "\n")


def _matrix_rows(u):
    rows = []
    for i in range(u.shape[0]):
        for j in range(u.shape[1]):
            rows.append((i, j, float(u[i, j].real), float(u[i, j].imag)))
    return rows


def cmd_levels(cfg, out, rep):
    rows = []
    for sign in (1, -1):
        p = cfg.cluster.with_(zeeman_sign=sign)
        for lv in energy_table(p, min(3, p.s.dim)):
            gap = lv.gap if lv.gap is not None else math.inf
            rows.append((sign, lv.label, lv.m_s, lv.n_electrons, lv.energy, gap))
        rep.add(f"zeeman_sign={sign:+d}: gap |0>->|1> = {fmt(energy_table(p, 2)[0].gap)} meV, "
                f"w0 = {fmt(larmor_frequency(p))} rad/ps")
    write_csv(out / "levels.csv", ("zeeman_sign", "label", "m_s", "n_electrons", "energy_meV", "gap_meV"), rows)


def cmd_gates(cfg, out, rep):
    s = cfg.cluster.s
    rows = []
    for name, fn in (("X", gate_x), ("Y", gate_y), ("Z", gate_z)):
        for a in cfg.gate_angles:
            u = fn(s, a)
            rows.append((name, a, is_unitary(u)) + tuple(v for z in u.ravel() for v in (z.real, z.imag)))
            if name == "Z":
                off = max(abs(u[0, 1]), abs(u[1, 0]))
                rep.add(f"Z({fmt(a)}): max off-diagonal {fmt(float(off))}, "
                        f"arg(<0|Z|0>/<1|Z|1>) = {fmt(float(np.angle(relative_phase(u))))}")
    header = ("gate", "alpha", "unitary") + tuple(
        f"u{i}{j}_{part}" for i in range(2) for j in range(2) for part in ("re", "im")
    )
    write_csv(out / "gates.csv", header, rows)
    rep.add(f"kappa = sqrt(1/2S) = {fmt(math.sqrt(1 / s.twice_s))}")


def cmd_pulse_sim(cfg, out, rep):
    p = cfg.cluster
    duration = cfg.sim_duration or pulse_duration(p, cfg.sim_angle)
    res = simulate_lab_frame(p, duration, cfg.sim_phase, cfg.sim_dt, max_drift=cfg.sim_max_drift)
    u = res.propagator
    rot = project_two_level(to_rotating_frame(u, p, duration), p.s)
    expected = rotation(p.s, rwa_rotation_angle(p, duration), cfg.sim_phase)
    rwa_fid = fidelity(rot, expected, unitary_atol=1.0)
    summary = [
        ("duration_ps", duration),
        ("dt_ps", res.dt),
        ("n_steps", res.n_steps),
        ("omega0_rad_per_ps", larmor_frequency(p)),
        ("omega1_rad_per_ps", rabi_frequency(p)),
        ("omega1_over_omega0", rabi_frequency(p) / larmor_frequency(p)),
        ("rotation_angle", rwa_rotation_angle(p, duration)),
        ("transfer_0_to_1", float(abs(u[1, 0]) ** 2)),
        ("leakage", res.leakage),
        ("unitarity_drift", res.unitarity_drift),
        ("rwa_fidelity", rwa_fid),
    ]
    write_csv(out / "pulse_sim.csv", ("quantity", "value"), summary)
    pops = [(i, m, float(abs(u[i, 0]) ** 2), float(abs(u[i, 1]) ** 2)) for i, m in enumerate(p.s.m_values())]
    write_csv(out / "pulse_sim_populations.csv", ("index", "m", "from_0", "from_1"), pops)
    for k, v in summary:
        rep.add(f"{k} = {fmt(v)}")


def cmd_cnot(cfg, out, rep):
    j = cfg.cnot_coupling
    s = cfg.cluster.s
    chain = ChainSpec.uniform(cfg.cluster, 2, j)
    prog = compile_cnot(s, j)
    hw = expand_z(prog, s)
    u = compose(prog, chain)
    f = fidelity(u, ideal_cnot(2, 0, 1))
    f_hw = fidelity(compose(hw, chain), ideal_cnot(2, 0, 1))
    _atomic_write(out / "cnot_program.txt", prog.to_text())
    _atomic_write(out / "cnot_program_hw.txt", hw.to_text())
    write_csv(out / "cnot.csv", ("row", "col", "re", "im"), _matrix_rows(u))
    rep.add(f"fidelity {fmt(f)} {'>=' if f >= 0.999999999 else '<'} 0.999999999")
    rep.add(f"hardware-form fidelity {fmt(f_hw)}")
    rep.add(f"ZZ wait = pi*hbar/J = {fmt(math.pi * HBAR / j)} ps")
    rep.add("")
    rep.add("program (KIND target angle_or_duration phase):")
    rep.lines += ["  " + line for line in prog.to_text().splitlines()]
    rep.add("")
    rep.add("hardware program (RZ lowered to RX/RY):")
    rep.lines += ["  " + line for line in hw.to_text().splitlines()]


def cmd_route(cfg, out, rep):
    chain = cfg.chain
    n = len(chain)
    c, t = cfg.route_control, cfg.route_target
    for w in chain.rwa_warnings():
        rep.add("warning: " + w)
    prog = route_cnot(chain, c, t)
    u = compose(prog, chain)
    ideal = ideal_cnot(n, c, t)
    rows = []
    for k in range(2**n):
        col = np.abs(u[:, k]) ** 2
        out_state = int(np.argmax(col))
        rows.append((format(k, f"0{n}b"), format(out_state, f"0{n}b"), float(col[out_state])))
    write_csv(out / "route.csv", ("input", "output", "probability"), rows)
    _atomic_write(out / "route_program.txt", prog.to_text())
    rep.add(f"route control={c} target={t}: {len(route_blocks(c, t))} adjacent C-NOT blocks, "
            f"{len(prog)} instructions")
    rep.add(f"fidelity vs ideal = {fmt(fidelity(u, ideal))}")


def cmd_readout(cfg, out, rep):
    rp = cfg.readout
    s = rp.cluster.s
    c = crossing_voltages(rp)
    v_max = cfg.readout_v_max if cfg.readout_v_max is not None else c.v1 + 0.5
    v_min = cfg.readout_v_min if cfg.readout_v_min is not None else c.v0 - 0.5
    if not v_max > v_min:
        raise ConfigError("readout_v_max must exceed readout_v_min")
    sweep = np.linspace(v_max, v_min, cfg.readout_points)
    curves = [
        (float(v), composite_energy(rp, ground_state(s), v), composite_energy(rp, excited_state(s), v),
         composite_energy(rp, charged_state(s), v))
        for v in sweep
    ]
    write_csv(out / "readout.csv", ("script_V_meV", "E0_meV", "E1_meV", "E01_meV"), curves)
    peaks = []
    for state in (0, 1):
        tr = readout_trace(rp, state, sweep)
        if tr.peaks:
            pk = tr.peaks[0]
            peaks.append((state, pk.script_v, pk.sweep_index, "peak"))
        else:
            peaks.append((state, math.inf, -1, tr.note))
    write_csv(out / "readout_peaks.csv", ("collapsed_state", "script_V_meV", "sweep_index", "event"), peaks)
    rep.add(f"v0 = {fmt(c.v0)} meV (bisection {fmt(c.v0_bisect)})")
    rep.add(f"v1 = {fmt(c.v1)} meV (bisection {fmt(c.v1_bisect)})")
    rep.add(f"v1 - printed 2K(S-1) form = {fmt(c.paper_v1_discrepancy)} meV")
    rep.add("script V = eps - e*V_bias")


def cmd_init(cfg, out, rep):
    p = cfg.cluster
    levels = energy_table(p, cfg.init_levels)
    rows = []
    for t in cfg.init_T:
        pops = thermal_populations(p, t, cfg.init_levels)
        for lv, pr in zip(levels, pops):
            rows.append((t, lv.label, lv.m_s, lv.energy, float(pr)))
        rep.add(f"T={fmt(t)} K: P(|0>) = {fmt(float(pops[0]))}")
    write_csv(out / "init.csv", ("T_K", "label", "m_s", "energy_meV", "probability"), rows)


def cmd_decoherence(cfg, out, rep):
    q = cfg.decoherence_query
    mode = cfg.xi_mode
    fac = tau_factorization(q)
    rows = [
        ("xi_mode", mode),
        ("omega_fi_rad_per_ps", q.omega),
        ("phonon_occupation", phonon_occupation(q.omega, q.temperature)),
        ("xi_sq_meV2", spin_matrix_element_sq(q, mode)),
        ("rate_per_s", transition_rate(q, mode)),
        ("tau_s", decoherence_time(q, mode)),
        ("gate_time_ps", gate_time(q.cluster)),
        ("ops_budget", ops_budget(q, mode)),
        ("thermal_factor", fac["thermal"]),
        ("inertia_factor", fac["inertia"]),
        ("prefactor", fac["prefactor"]),
        ("commutator_residual", anisotropy_commutator_residual(q.cluster)),
    ]
    write_csv(out / "decoherence.csv", ("quantity", "value"), rows)
    for k, v in rows:
        rep.add(f"{k} = {fmt(v)}")


def cmd_sweep(cfg, out, rep):
    rows = fig6_sweep(cfg.decoherence_query.with_(omega_fi=cfg.omega_fi), cfg.sweep_S, cfg.sweep_T, cfg.xi_mode)
    write_csv(out / "fig6_sweep.csv", SWEEP_HEADER, rows)
    rep.add(f"{len(rows)} rows ({len(cfg.sweep_S)} spins x {len(cfg.sweep_T)} temperatures), xi_mode={cfg.xi_mode}")


def cmd_audit(cfg, out, rep):
    items = run_audit(cfg.cluster, cfg.readout, cfg.cnot_coupling)
    write_csv(
        out / "audit.csv",
        ("item", "printed", "derived", "discrepancy", "note"),
        [(it.name, it.printed, it.derived, it.discrepancy, it.note) for it in items],
    )
    for it in items:
        rep.add(f"[{it.name}]")
        rep.add(f"  printed     {fmt(it.printed)}")
        rep.add(f"  derived     {fmt(it.derived)}")
        rep.add(f"  discrepancy {fmt(it.discrepancy)}")
        rep.add(f"  {it.note}")
    rep.add("")
    rep.add("notes")
    rep.add("  state normalisation is |alpha|^2 + |beta|^2 = 1 (complex amplitudes)")
    rep.add("  Y pulses are driven at phase pi/2; a drive at phase pi gives -Sx, not Sy")


COMMANDS = {
    "levels": cmd_levels,
    "gates": cmd_gates,
    "pulse-sim": cmd_pulse_sim,
    "cnot": cmd_cnot,
    "route": cmd_route,
    "readout": cmd_readout,
    "init": cmd_init,
    "decoherence": cmd_decoherence,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
}


def run(subcommand: str, config_path, output_dir, overrides: dict | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    if subcommand not in COMMANDS:
        print(f"error: unknown subcommand {subcommand!r}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(config_path, overrides)
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        rep = Report(subcommand, cfg)
        COMMANDS[subcommand](cfg, out, rep)
        rep.write(out)
    except IntegrationError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcqsim", description="Magnetic-cluster qubit simulator and pulse compiler")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="flat key = value parameter file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--zeeman-sign", type=int, choices=(1, -1), default=None)
    ap.add_argument("--xi-mode", choices=("exact", "paper"), default=None)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.zeeman_sign is not None:
        overrides["zeeman_sign"] = args.zeeman_sign
    if args.xi_mode is not None:
        overrides["xi_mode"] = args.xi_mode
    return run(args.subcommand, args.config, args.out, overrides)


if __name__ == "__main__":
    sys.exit(main())
