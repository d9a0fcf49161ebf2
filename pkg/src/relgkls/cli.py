"""Batch front end: ``relgkls {modes,evolve,dilation,check,boost}``.

Exit status: 0 success, 1 a check or bound failed, 2 invalid input
(config, arguments, identity-file syntax), 3 a run was aborted
(physicality monitor, memory guard).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import boostpde
from .config import ConfigError, RunConfig, override_fields
from .dilation import CollisionConfig, MemoryGuardError, oracle_compare
from .fockspace import FockBasis, ModeSet
from .generators import blp_spec, gkls_generator, hamiltonian, no_dissipator, poulin_spec
from .integrator import DensityMatrix, PhysicalityError, decay_fit, evolve
from .opalgebra.identities import builtins_ok, run_corpus
from .opalgebra.parser import ParseError

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_ABORTED = 0, 1, 2, 3


# ---------------------------------------------------------------- output helpers

def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(obj):
    """Make floats JSON-safe (non-finite values become strings)."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    atomic_write(path, json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- builders

def build_basis(cfg: RunConfig) -> FockBasis:
    s = cfg.space
    return FockBasis(ModeSet(float(s.L), int(s.J), float(s.m)), int(s.n_max))


def build_generator(cfg: RunConfig, basis: FockBasis):
    d = cfg.dissipator
    if d.kind == "poulin":
        spec = poulin_spec(basis, float(d.gamma), d.ordering)
    elif d.kind == "blp":
        spec = blp_spec(basis, float(d.g))
    else:
        spec = no_dissipator(basis)
    return gkls_generator(hamiltonian(basis) if d.hamiltonian else None, spec)


def build_initial_state(text: str, basis: FockBasis, seed: int) -> DensityMatrix:
    kind, _, arg = text.partition(":")
    if kind == "vacuum":
        return DensityMatrix.vacuum(basis)
    if kind == "fock":
        occ = [int(x) for x in arg.split(",")]
        return DensityMatrix.fock(basis, occ)
    if kind == "superposition":
        j = int(arg or 0)
        occ = [0] * basis.M
        psi = basis.vacuum().astype(complex)
        occ[basis.mode_set.position(j)] = 1
        psi = (psi + basis.basis_vector(occ)) / math.sqrt(2)
        return DensityMatrix.pure(basis, psi)
    if kind == "random":
        return DensityMatrix.random(basis, np.random.default_rng(seed))
    raise ConfigError(f"unknown initial_state {text!r}")


# ---------------------------------------------------------------- subcommands

def cmd_modes(cfg: RunConfig, out: Path) -> int:
    ms = ModeSet(float(cfg.space.L), int(cfg.space.J), float(cfg.space.m))
    gamma = float(cfg.dissipator.gamma)
    rows = []
    print(f"{'j':>4} {'k_j':>12} {'omega_j':>12} {'Gamma_j':>12}")
    for j, k, w in zip(ms.indices, ms.k, ms.omega):
        row = {"j": int(j), "k": float(k), "omega": float(w), "Gamma": 2 * gamma * float(w),
               "zero_mode": bool(w == 0.0)}
        rows.append(row)
        note = "  WARNING: massless zero mode (omega = 0)" if row["zero_mode"] else ""
        print(f"{row['j']:>4d} {row['k']:>12.6g} {row['omega']:>12.6g} {row['Gamma']:>12.6g}{note}")
    write_json(out / "modes.json", {"config": cfg.to_dict(), "modes": rows})
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    basis = build_basis(cfg)
    gen = build_generator(cfg, basis)
    rho0 = build_initial_state(cfg.integrator.initial_state, basis, cfg.seed)
    ic = cfg.integrator
    traj = evolve(rho0, gen, float(ic.t_max), float(ic.dt), int(ic.record_every), keep_states=False)
    atomic_write(out / "trajectory.csv", traj.to_csv())
    ms = basis.mode_set
    rates = []
    for p, (j, w) in enumerate(zip(ms.indices, ms.omega)):
        entry = {"j": int(j), "omega": float(w)}
        if cfg.dissipator.kind == "poulin" and cfg.dissipator.ordering == "decay":
            entry["expected_rate"] = 2 * float(cfg.dissipator.gamma) * float(w)
        try:
            entry["fitted_rate"] = -decay_fit(traj, int(j))
        except ValueError as err:
            entry["fitted_rate"] = None
            entry["fit_note"] = str(err)
        rates.append(entry)
    summary = {
        "config": cfg.to_dict(),
        "final": {
            "t": float(traj.times[-1]),
            "trace": float(traj.trace[-1]),
            "purity": float(traj.purity[-1]),
            "N_total": float(traj.N_total[-1]),
            "N_modes": [float(x) for x in traj.N_modes[-1]],
        },
        "decay_rates": rates,
        "monitor_maxima": traj.monitor_maxima(),
        "flagged_records": int(sum(f != "ok" for f in traj.flags)),
        "records": len(traj),
    }
    write_json(out / "evolve.json", summary)
    print(f"evolve: {len(traj)} records, final N_total = {summary['final']['N_total']:.10g}")
    return EXIT_OK


def cmd_dilation(cfg: RunConfig, out: Path) -> int:
    basis = build_basis(cfg)
    dc = cfg.dilation
    gamma = float(cfg.dissipator.gamma)
    config = CollisionConfig(basis, float(dc.dt), float(dc.t_max), gamma, int(dc.n_anc), int(dc.max_dim))
    gen = gkls_generator(hamiltonian(basis), poulin_spec(basis, gamma))
    rho0 = build_initial_state(cfg.integrator.initial_state, basis, cfg.seed)
    report = oracle_compare(rho0, gen, config)
    ok = report.max_trace_distance <= float(dc.max_trace_distance)
    write_json(out / "dilation.json", {
        "config": cfg.to_dict(), **report.to_dict(),
        "bound": float(dc.max_trace_distance), "within_bound": ok,
    })
    print(f"dilation: max trace distance {report.max_trace_distance:.3e} "
          f"(bound {dc.max_trace_distance:g}), dt-halving ratio {report.dt_half_ratio:.4f}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_check(cfg: RunConfig, out: Path) -> int:
    user = None
    if cfg.check.identity_file:
        user = Path(cfg.check.identity_file).read_text()
    reports = run_corpus(user, seed=int(cfg.seed), basis=build_basis(cfg))
    ok = builtins_ok(reports)
    write_json(out / "check.json", {
        "config": cfg.to_dict(),
        "reports": [r.to_dict() for r in reports],
        "builtins_ok": ok,
    })
    for r in reports:
        if r.source != "property":
            status = "ok" if r.passed else "FAILED"
            print(f"{r.name}: {r.verdict} (expected {r.expected}) {status}")
    n_prop = sum(r.source == "property" for r in reports)
    n_prop_ok = sum(r.passed for r in reports if r.source == "property")
    print(f"property checks: {n_prop_ok}/{n_prop} passed")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_boost(cfg: RunConfig, out: Path) -> int:
    b = cfg.boost
    gamma, zeta, k = float(b.gamma), float(b.zeta), float(b.k)
    m = float(cfg.space.m)
    kg = boostpde.report(boostpde.klein_gordon(m), zeta, k)
    damped = boostpde.report(boostpde.damped_field_equation(gamma, m), zeta, k)
    expected_cross = math.sinh(2 * zeta) * (1 + gamma**2)
    ok = kg["verdict"] == "invariant" and damped["verdict"] == "non_invariant"
    write_json(out / "boost.json", {
        "config": cfg.to_dict(),
        "klein_gordon": kg,
        "damped": damped,
        "closed_form_cross_term": expected_cross,
    })
    print(f"klein_gordon: {kg['verdict']}; damped: {damped['verdict']} "
          f"(cross term {damped['witness']['cross_term']:.6g})")
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {"modes": cmd_modes, "evolve": cmd_evolve, "dilation": cmd_dilation,
            "check": cmd_check, "boost": cmd_boost}


# ---------------------------------------------------------------- argument handling

def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _converter(kind: type):
    if kind is bool:
        return _parse_bool
    if kind is float:
        return float
    if kind is int:
        return int
    return str


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relgkls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " subcommand")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (overrides out_dir)")
        p.add_argument("--seed", type=int, help="seed for randomized checks and states")
        for dotted, kind in override_fields():
            p.add_argument(f"--{dotted}", dest=dotted, type=_converter(kind), default=None,
                           metavar=kind.__name__.upper())
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for dotted, _ in override_fields():
        value = getattr(args, dotted)
        if value is not None:
            cfg.override(dotted, value)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, TypeError) as err:
        print(f"relgkls: invalid config: {err}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](cfg, Path(cfg.out_dir))
    except ParseError as err:
        print(f"relgkls: identity file: {err}", file=sys.stderr)
        return EXIT_INVALID
    except (PhysicalityError, MemoryGuardError) as err:
        print(f"relgkls: aborted: {err}", file=sys.stderr)
        return EXIT_ABORTED
    except (ConfigError, ValueError, OSError) as err:
        print(f"relgkls: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
