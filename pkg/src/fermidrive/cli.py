"""Command-line interface.

Usage::

    fermidrive evolve   --config run.ini --out results/
    fermidrive steady   --chain 8 --r 1e-3 --alpha 0.7 --b 7 --out results/
    fermidrive phi      --chain 100 --b 99 --out results/
    fermidrive lindblad --chain 16 --set lindblad.gamma_a=1e-3 --out results/
    fermidrive oracle   --chain 3 --r 0.3 --out results/
    fermidrive sweep    --config grid.ini --out results/

Exit codes: 0 success, 1 configuration error, 2 numerical error, 3 I/O error.
Sweep parallelism is set by the ``FERMIDRIVE_THREADS`` environment variable.
"""

import argparse
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .channels import DriveProtocol, DriveStep, evolve
from .config import config_dict, load_config
from .errors import ConfigError, FermiDriveError, NumericError
from .fock import OracleDrive, gaussian_state, oracle_two_point
from .lindblad import LindbladParams, lindblad_evolve, lindblad_steady
from .models import (build_hopping_chain, initial_state, load_model, mode_occupations,
                     overlaps, random_correlation_matrix)
from .output import matrix_rows, write_csv, write_json
from .phi import lindblad_phi, phi_coefficients, phi_distribution
from .steady import steady_direct, steady_fixed_point, vectorize

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 1, 2, 3
THREADS_ENV = "FERMIDRIVE_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_model(cfg):
    if cfg.chain is not None:
        return build_hopping_chain(cfg.chain)
    return load_model(cfg.matrix)


def build_protocol(cfg, n, **changes):
    params = dict(r=cfg.r, alpha=cfg.alpha, tau=cfg.tau, a=cfg.a, b=n if cfg.b is None else cfg.b)
    params.update(changes)
    proto = DriveProtocol(**params)
    proto.site_indices(n)
    return proto


def build_initial(cfg, model):
    if cfg.initial == "random":
        return random_correlation_matrix(model.site_count, np.random.default_rng(cfg.seed))
    return initial_state(model, cfg.initial, cfg.wall_site)


def _energy_rows(model, occ, step=None):
    for k, (e, x) in enumerate(zip(model.energies, occ), start=1):
        yield (k, e, x) if step is None else (step, k, e, x)


# -- commands -----------------------------------------------------------------

def cmd_evolve(cfg, out):
    model = build_model(cfg)
    n = model.site_count
    proto = build_protocol(cfg, n)
    traj = evolve(build_initial(cfg, model), proto, model, cfg.steps, stride=cfg.stride,
                  checkpoint_stride=cfg.checkpoint_stride, kernel=cfg.kernel)
    header = ["step", "time", "nbar"] + [f"n_{i}" for i in range(1, n + 1)]
    write_csv(out / "trajectory.csv", header,
              ([s, t, nb, *d] for s, t, nb, d in zip(traj.steps, traj.time, traj.nbar, traj.densities)))
    rows = (row for s, occ in zip(traj.checkpoint_steps, traj.occupations)
            for row in _energy_rows(model, occ, int(s)))
    write_csv(out / "occupations.csv", ["step", "k", "E_k", "phi_k"], rows)
    write_json(out / "evolve.json", {"command": "evolve", "config": config_dict(cfg),
                                     "final_nbar": traj.nbar[-1]})


def _solve_steady(cfg, model, proto):
    if cfg.method == "direct":
        return steady_direct(vectorize(proto, model, allow_large=cfg.allow_large))
    g0 = build_initial(cfg, model)
    return steady_fixed_point(g0, proto, model, tol=cfg.tol, max_iter=cfg.max_iter, kernel=cfg.kernel)


def cmd_steady(cfg, out):
    model = build_model(cfg)
    proto = build_protocol(cfg, model.site_count)
    res = _solve_steady(cfg, model, proto)
    write_csv(out / "steady_G.csv", ["i", "j", "re", "im"], matrix_rows(res.G))
    write_csv(out / "steady_diag.csv", ["k", "E_k", "phi_k"],
              _energy_rows(model, mode_occupations(model, res.G)))
    write_json(out / "steady.json", {
        "command": "steady", "config": config_dict(cfg), "residual": res.residual,
        "method": res.method, "unique": res.unique, "kernel_dimension": res.kernel_dimension,
        "iterations": res.iterations, "nbar": float(np.trace(res.G).real / model.site_count),
    })


def cmd_phi(cfg, out):
    model = build_model(cfg)
    proto = build_protocol(cfg, model.site_count)
    c = phi_coefficients(model, proto)
    phi = phi_distribution(model, proto, c)
    pa = overlaps(model, proto.a).values
    pb = overlaps(model, proto.b).values
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = pa / pb
    rows = ((k + 1, model.energies[k], pa[k], pb[k], ratio[k], phi[k]) for k in range(model.site_count))
    write_csv(out / "phi.csv", ["k", "E_k", "p_a_k", "p_b_k", "ratio", "phi_k"], rows)
    write_json(out / "phi.json", {
        "command": "phi", "config": config_dict(cfg), "A": c.A, "B": c.B,
        "Q_aa": c.Qaa, "Q_bb": c.Qbb, "Q_ab": c.Qab, "mu": c.mu,
    })


def _order_ratio(g0, model, params, dt, steps):
    finals = [lindblad_evolve(g0, model, params, dt / m, steps * m, stride=steps * m).final
              for m in (1, 2, 4)]
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    return float(e1 / e2) if e2 > 0 else float("inf")


def cmd_lindblad(cfg, out):
    model = build_model(cfg)
    n = model.site_count
    params = LindbladParams(cfg.gamma_a, cfg.gamma_b, cfg.a, n if cfg.b is None else cfg.b)
    params.site_indices(n)
    res = lindblad_steady(model, params)
    exact = mode_occupations(model, res.G)
    small = lindblad_phi(model, params)
    write_csv(out / "lindblad_steady.csv", ["k", "E_k", "phi_exact", "phi_small_gamma"],
              ((k + 1, model.energies[k], exact[k], small[k]) for k in range(n)))
    meta = {"command": "lindblad", "config": config_dict(cfg), "residual": res.residual,
            "max_abs_small_gamma_deviation": float(np.max(np.abs(exact - small)))}
    if cfg.lindblad_steps > 0:
        g0 = build_initial(cfg, model)
        traj = lindblad_evolve(g0, model, params, cfg.dt, cfg.lindblad_steps, stride=cfg.stride)
        header = ["step", "time", "nbar"] + [f"n_{i}" for i in range(1, n + 1)]
        write_csv(out / "lindblad_trajectory.csv", header,
                  ([s, t, nb, *d] for s, t, nb, d in zip(traj.steps, traj.time, traj.nbar, traj.densities)))
        if cfg.order_check:
            meta["order_ratio"] = _order_ratio(g0, model, params, cfg.dt, cfg.lindblad_steps)
    write_json(out / "lindblad.json", meta)


def cmd_oracle(cfg, out):
    model = build_model(cfg)
    n = model.site_count
    if n > tol.FOCK_MAX_N:
        raise ConfigError(f"oracle supports N <= {tol.FOCK_MAX_N}, got {n}")
    proto = build_protocol(cfg, n)
    g = build_initial(cfg, model)
    rho = gaussian_state(g)
    spec0 = np.linalg.eigvalsh(rho.rho)
    oracle = OracleDrive(proto, model)
    step = DriveStep(proto, model.propagator(proto.tau))
    rows, worst = [], 0.0
    track_spectrum = proto.r == 0
    for k in range(cfg.oracle_steps + 1):
        if k:
            g, rho = step(g), oracle(rho)
        dev = float(np.max(np.abs(oracle_two_point(rho) - g)))
        worst = max(worst, dev)
        row = [k, dev]
        if track_spectrum:
            row.append(float(np.max(np.abs(np.linalg.eigvalsh(rho.rho) - spec0))))
        rows.append(row)
    header = ["step", "max_abs_dev"] + (["spectrum_drift"] if track_spectrum else [])
    write_csv(out / "oracle.csv", header, rows)
    write_json(out / "oracle.json", {"command": "oracle", "config": config_dict(cfg),
                                     "max_abs_dev": worst, "threshold": 1e-8})
    if worst > 1e-8:
        raise NumericError(f"closed hierarchy deviates from the oracle by {worst:.3e}")


def _sweep_point(cfg, model, point):
    n = model.site_count
    r, alpha, tau, a, b = point
    row = {"r": r, "alpha": alpha, "tau": tau, "a": a, "b": b}
    try:
        proto = build_protocol(cfg, n, r=r, alpha=alpha, tau=tau, a=a, b=b)
        res = _solve_steady(cfg, model, proto)
        row.update(method=res.method, residual=res.residual, unique=res.unique,
                   kernel_dimension=res.kernel_dimension,
                   nbar=float(np.trace(res.G).real / n), occ=mode_occupations(model, res.G))
        try:
            row["phi"] = phi_distribution(model, proto)
        except NumericError as exc:
            row["error"] = f"phi: {exc}"
    except FermiDriveError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_grid(cfg, n):
    s = cfg.sweep
    axes = [s.get("r", [cfg.r]), s.get("alpha", [cfg.alpha]), s.get("tau", [cfg.tau]),
            s.get("a", [cfg.a]), s.get("b", [n if cfg.b is None else cfg.b])]
    return list(itertools.product(*axes))


def cmd_sweep(cfg, out):
    model = build_model(cfg)
    n = model.site_count
    grid = sweep_grid(cfg, n)
    workers = int(os.environ.get(THREADS_ENV, "0")) or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda p: _sweep_point(cfg, model, p), grid))
    header = (["r", "alpha", "tau", "a", "b", "method", "residual", "unique", "kernel_dimension", "nbar"]
              + [f"occ_{k}" for k in range(1, n + 1)] + [f"phi_{k}" for k in range(1, n + 1)] + ["error"])

    def row(res):
        occ = res.get("occ", [None] * n)
        phi = res.get("phi", [None] * n)
        return ([res[k] for k in ("r", "alpha", "tau", "a", "b")]
                + [res.get(k) for k in ("method", "residual", "unique", "kernel_dimension", "nbar")]
                + list(occ) + list(phi) + [res.get("error", "")])

    write_csv(out / "sweep.csv", header, (row(r) for r in results))
    write_json(out / "sweep.json", {"command": "sweep", "config": config_dict(cfg), "points": len(grid),
                                    "failed": sum(1 for r in results if r.get("error"))})


COMMANDS = {
    "evolve": cmd_evolve,
    "steady": cmd_steady,
    "phi": cmd_phi,
    "lindblad": cmd_lindblad,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
}

# flag name -> section.key
FLAG_KEYS = {
    "chain": "model.chain", "matrix": "model.matrix",
    "r": "protocol.r", "alpha": "protocol.alpha", "tau": "protocol.tau",
    "a": "protocol.a", "b": "protocol.b",
    "initial": "initial.kind", "wall_site": "initial.wall_site",
    "steps": "run.steps", "stride": "run.stride", "checkpoint_stride": "run.checkpoint_stride",
    "kernel": "run.kernel", "seed": "run.seed", "method": "steady.method",
}


def make_parser():
    parser = _Parser(prog="fermidrive", description="Driven free-fermion lattice simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="INI-style run configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one configuration key (repeatable)")
        for flag in FLAG_KEYS:
            p.add_argument("--" + flag.replace("_", "-"), dest=flag, default=None)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        overrides = list(args.set) + [f"{FLAG_KEYS[f]}={getattr(args, f)}"
                                      for f in FLAG_KEYS if getattr(args, f) is not None]
        cfg = load_config(args.config, overrides).validate()
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"fermidrive: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"fermidrive: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"fermidrive: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
