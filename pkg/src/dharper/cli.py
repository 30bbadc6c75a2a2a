"""Command-line entry point.

One binary, subcommand style: every experiment is a subcommand reading a
flat key-value config file with command-line flags taking precedence.
Each run writes CSVs with documented schemas plus a sidecar meta JSON
echoing the fully derived parameter set, the seed, dt, tool version and
wall-clock duration.  Identical config and seed give bitwise-identical
CSVs regardless of --threads.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import time

import numpy as np

from . import __version__, classical, floquet, quantum, static_harper
from .config import ConfigError, parse_config_file, positive, resolve_beta, resolve_model
from .model import BetaClass, derive_params, golden_beta, params_from_split
from .output import atomic_write_bytes, git_describe, write_csv, write_meta

SUBCOMMANDS = ("classical-map", "classical-spread", "island-scan",
               "quantum-evolve", "floquet-build", "floquet-scan", "alpha-scan",
               "butterfly", "aa-transition", "repro")

FIG_ALPHA = 0.1545
FIG_OMEGA1 = 0.3
FIG_OMEGA3 = 0.45
DENSITY_FLOOR = 1e-12    # density-history rows below this are omitted


def main(argv=None) -> None:
    sys.exit(run(argv if argv is not None else sys.argv[1:]))


def run(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    # --threads is accepted for the parallel-map contract; every kernel is
    # a deterministic map, so results never depend on it
    try:
        cfg = _merge_config(args)
        t0 = time.monotonic()
        outputs = _dispatch(args.command, cfg, args)
        duration = time.monotonic() - t0
        if not cfg.get("quiet"):
            for path in outputs:
                print(path)
            print(f"done in {duration:.1f}s")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dharper",
        description="driven Harper model laboratory")
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument("--out", help="output directory (default $DHARPER_OUT or ./dharper_out)")
    parser.add_argument("--seed", type=int, help="RNG seed (Philox), default 12345")
    parser.add_argument("--threads", type=int,
                        help="worker count for parallel maps; results never depend on it")
    parser.add_argument("--quiet", action="store_true", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        return p

    float_keys = [
        ("--omega", "omega"), ("--j-x", "j_x"), ("--j-y", "j_y"),
        ("--alpha", "alpha"), ("--beta-irrational", "beta_irrational"),
    ]
    int_keys = [("--beta-r", "beta_r"), ("--beta-q", "beta_q")]

    def add_model(p):
        for flag, dest in float_keys:
            if dest == "beta_irrational":
                p.add_argument(flag, dest=dest, help="'golden' or a number")
            else:
                p.add_argument(flag, dest=dest, type=float)
        for flag, dest in int_keys:
            p.add_argument(flag, dest=dest, type=int)

    p = add("classical-map", help="stroboscopic phase-space map")
    add_model(p)
    p.add_argument("--grid", dest="grid", type=int, help="NxN grid of starts (default 10)")
    p.add_argument("--periods", dest="periods", type=int)
    p.add_argument("--steps-per-period", dest="steps_per_period", type=int)
    p.add_argument("--name", dest="name")

    p = add("classical-spread", help="ensemble dispersion and ballistic rate")
    add_model(p)
    p.add_argument("--members", dest="members", type=int)
    p.add_argument("--periods", dest="periods", type=int)
    p.add_argument("--steps-per-period", dest="steps_per_period", type=int)
    p.add_argument("--name", dest="name")

    p = add("island-scan", help="transporting-island fraction of the cell")
    add_model(p)
    p.add_argument("--grid-nx", dest="grid_nx", type=int)
    p.add_argument("--grid-np", dest="grid_np", type=int)
    p.add_argument("--measure-periods", dest="measure_periods", type=int)
    p.add_argument("--name", dest="name")

    p = add("quantum-evolve", help="wave-packet evolution (Eq. 2 or Eq. 8 route)")
    add_model(p)
    p.add_argument("--gauge", dest="gauge", choices=("eq2", "eq8"))
    p.add_argument("--periods", dest="periods", type=int)
    p.add_argument("--steps-per-period", dest="steps_per_period", type=int)
    p.add_argument("--window", dest="window", type=int)
    p.add_argument("--center-x", dest="center_x", type=float)
    p.add_argument("--center-p", dest="center_p", type=float)
    p.add_argument("--snapshot-periods", dest="snapshot_periods", type=float,
                   help="density snapshot stride in units of T_y (default 5)")
    p.add_argument("--name", dest="name")

    p = add("floquet-build", help="build and store the one-period operator")
    add_model(p)
    p.add_argument("--window", dest="window", type=int)
    p.add_argument("--tol", dest="tol", type=float)
    p.add_argument("--name", dest="name")

    p = add("floquet-scan", help="mean participation ratio vs omega")
    add_model(p)
    p.add_argument("--omega-grid", dest="omega_grid",
                   help="comma-separated omega values")
    p.add_argument("--window", dest="window", type=int)
    p.add_argument("--n-states", dest="n_states", type=int)
    p.add_argument("--tol", dest="tol", type=float)
    p.add_argument("--accuracy", dest="accuracy", type=float)
    p.add_argument("--state-omega", dest="state_omega", type=float,
                   help="omega at which to dump one typical eigenstate")
    p.add_argument("--name", dest="name")

    p = add("alpha-scan", help="mean participation ratio vs alpha at fixed omega")
    add_model(p)
    p.add_argument("--alpha-grid", dest="alpha_grid",
                   help="comma-separated alpha values")
    p.add_argument("--window", dest="window", type=int)
    p.add_argument("--n-states", dest="n_states", type=int)
    p.add_argument("--tol", dest="tol", type=float)
    p.add_argument("--accuracy", dest="accuracy", type=float)
    p.add_argument("--name", dest="name")

    p = add("butterfly", help="Hofstadter butterfly dataset of the static chain")
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--chain-length", dest="chain_length", type=int)
    p.add_argument("--n-phases", dest="n_phases", type=int)
    p.add_argument("--j-x", dest="j_x", type=float)
    p.add_argument("--j-y", dest="j_y", type=float)
    p.add_argument("--name", dest="name")

    p = add("aa-transition", help="Aubry-Andre localization diagnostic")
    p.add_argument("--ratios", dest="ratios", help="comma-separated J_y/J_x values")
    p.add_argument("--sizes", dest="sizes", help="comma-separated chain lengths")
    p.add_argument("--name", dest="name")

    p = add("repro", help="canned parameter sets for the paper figures")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3", "fig4"))
    p.add_argument("--periods", dest="periods", type=int,
                   help="downscale override for horizons")
    p.add_argument("--members", dest="members", type=int)
    p.add_argument("--grid", dest="grid", type=int)
    p.add_argument("--window", dest="window", type=int)
    p.add_argument("--n-states", dest="n_states", type=int)
    p.add_argument("--omega-grid", dest="omega_grid")
    p.add_argument("--measure-periods", dest="measure_periods", type=int)
    p.add_argument("--accuracy", dest="accuracy", type=float)
    return parser


def _merge_config(args) -> dict:
    cfg = {}
    if args.config:
        cfg.update(parse_config_file(args.config))
    for key, val in vars(args).items():
        if key in ("config", "command", "figure") or val is None:
            continue
        cfg[key] = val
    cfg.setdefault("seed", 12345)
    cfg["out"] = args.out or cfg.get("out") or os.environ.get("DHARPER_OUT", "dharper_out")
    if getattr(args, "figure", None):
        cfg["figure"] = args.figure
    return cfg


def _meta(cfg: dict, d=None, extra=None) -> dict:
    meta = {
        "tool": "dharper",
        "tool_version": __version__,
        "git_describe": git_describe(),
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "seed": cfg.get("seed"),
    }
    if d is not None:
        meta["derived_params"] = {
            "j_x": d.j_x, "j_y": d.j_y, "alpha": d.alpha,
            "omega_x": d.omega_x, "omega_y": d.omega_y, "beta": d.beta,
            "omega": d.omega, "Omega": d.Omega, "jp_x": d.jp_x, "jp_y": d.jp_y,
            "t_y": d.t_y, "hbar_eff": d.hbar_eff,
        }
    if extra:
        meta.update(extra)
    return meta


def _out_path(cfg: dict, name: str) -> str:
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, name)


def _timed_meta(cfg, d, extra, t_start):
    meta = _meta(cfg, d, extra)
    meta["duration_s"] = time.monotonic() - t_start
    return meta


# ---------------------------------------------------------------------------
# experiment drivers

def _dispatch(command: str, cfg: dict, args) -> list:
    driver = {
        "classical-map": cmd_classical_map,
        "classical-spread": cmd_classical_spread,
        "island-scan": cmd_island_scan,
        "quantum-evolve": cmd_quantum_evolve,
        "floquet-build": cmd_floquet_build,
        "floquet-scan": cmd_floquet_scan,
        "alpha-scan": cmd_alpha_scan,
        "butterfly": cmd_butterfly,
        "aa-transition": cmd_aa_transition,
        "repro": cmd_repro,
    }[command]
    return driver(cfg)


def cmd_classical_map(cfg: dict) -> list:
    t_start = time.monotonic()
    params, beta = resolve_model(cfg)
    d = derive_params(params)
    grid = int(cfg.get("grid", 10))
    periods = int(cfg.get("periods", 300))
    steps = int(cfg.get("steps_per_period", 200))
    name = cfg.get("name", "classical-map.csv")
    rows = []
    starts = (np.arange(grid) + 0.5) / grid * 2 * np.pi - np.pi
    for x0 in starts:
        for p0 in starts:
            traj = classical.stroboscopic_map((x0, p0), periods, d, dt=d.t_y / steps)
            rows.extend(zip(traj.times, traj.x, traj.p))
    path = _out_path(cfg, name)
    write_csv(path, ("t", "x_mod", "p_mod"), rows,
              _timed_meta(cfg, d, {"schema": "strobe-points/1", "dt": d.t_y / steps,
                                   "beta_kind": beta.kind}, t_start))
    return [path]


def cmd_classical_spread(cfg: dict) -> list:
    t_start = time.monotonic()
    params, beta = resolve_model(cfg)
    d = derive_params(params)
    members = int(cfg.get("members", 1000))
    periods = int(cfg.get("periods", 600))
    steps = int(cfg.get("steps_per_period", 200))
    name = cfg.get("name", "dispersion.csv")
    ens = classical.Ensemble.uniform_cell(members, int(cfg["seed"]))
    t_grid = np.arange(periods + 1) * d.t_y
    sigma = classical.ensemble_dispersion(ens, t_grid, d, d.t_y / steps)
    fit = classical.spreading_rate(t_grid, sigma)
    path = _out_path(cfg, name)
    write_csv(path, ("t", "sigma"), zip(t_grid, sigma),
              _timed_meta(cfg, d, {"schema": "dispersion/1", "beta_kind": beta.kind,
                                   "dt": d.t_y / steps, "members": members,
                                   "fit_A": fit.A, "fit_residual": fit.residual,
                                   "fit_ballistic": fit.ballistic}, t_start))
    return [path]


def cmd_island_scan(cfg: dict) -> list:
    t_start = time.monotonic()
    params, beta = resolve_model(cfg)
    d = derive_params(params)
    nx = int(cfg.get("grid_nx", 40))
    npp = int(cfg.get("grid_np", 40))
    measure = int(cfg.get("measure_periods", 200))
    name = cfg.get("name", "island-scan.csv")
    scan = classical.island_scan(d, grid_nx=nx, grid_np=npp,
                                 t_measure=measure * d.t_y)
    rows = []
    for i, pv in enumerate(scan.p_centers):
        for j, xv in enumerate(scan.x_centers):
            rows.append((xv, pv, int(scan.labels[i, j])))
    path = _out_path(cfg, name)
    write_csv(path, ("x", "p", "label"), rows,
              _timed_meta(cfg, d, {"schema": "island-scan/1", "S": scan.S,
                                   "beta_kind": beta.kind, "dt": d.t_y / 200,
                                   "measure_periods": measure}, t_start))
    return [path]


def cmd_quantum_evolve(cfg: dict) -> list:
    t_start = time.monotonic()
    params, beta = resolve_model(cfg)
    d = derive_params(params)
    gauge = cfg.get("gauge", "eq2")
    periods = int(cfg.get("periods", 500))
    steps = int(cfg.get("steps_per_period", 200))
    window = int(cfg.get("window", 2048))
    snap_periods = float(cfg.get("snapshot_periods", 5.0))
    name = cfg.get("name", f"quantum-{gauge}")
    psi = quantum.initial_packet(d, center_x=float(cfg.get("center_x", 0.0)),
                                 center_p=float(cfg.get("center_p", 0.0)),
                                 n_sites=window)
    propagate = quantum.propagate_eq2 if gauge == "eq2" else quantum.propagate_eq8
    rec = propagate(psi, periods * d.t_y, d.t_y / steps, d,
                    sigma_every=d.t_y, snapshot_every=snap_periods * d.t_y)
    sig_path = _out_path(cfg, name + "-sigma.csv")
    extra = {"schema": "quantum-sigma/1", "gauge": gauge, "dt": d.t_y / steps,
             "beta_kind": beta.kind, "periods": periods}
    write_csv(sig_path, ("t", "sigma"), zip(rec.times, rec.sigma),
              _timed_meta(cfg, d, extra, t_start))
    dens_path = _out_path(cfg, name + "-density.csv")
    rows = []
    for t, (off, dens) in zip(rec.snapshot_times, rec.snapshots):
        keep = np.nonzero(dens > DENSITY_FLOOR)[0]
        for i in keep:
            rows.append((t, off + i, dens[i]))
    extra = dict(extra)
    extra.update({"schema": "density-history/1", "density_floor": DENSITY_FLOOR,
                  "snapshot_periods": snap_periods})
    write_csv(dens_path, ("t", "l", "density"), rows,
              _timed_meta(cfg, d, extra, t_start))
    return [sig_path, dens_path]


def cmd_floquet_build(cfg: dict) -> list:
    t_start = time.monotonic()
    params, beta = resolve_model(cfg)
    d = derive_params(params)
    window = int(cfg.get("window", 256))
    tol = float(cfg.get("tol", 1e-8))
    name = cfg.get("name", "floquet.op")
    op = floquet.build_floquet(d, window, tol=tol)
    path = _out_path(cfg, name)
    buf = io.BytesIO()
    floquet.write_floquet(buf, op)
    atomic_write_bytes(path, buf.getvalue())
    write_meta(path + ".meta.json",
               _timed_meta(cfg, d, {"schema": "dhfq/1", "L": window, "tol": tol,
                                    "unitarity_defect": op.unitarity_defect(),
                                    "beta_kind": beta.kind}, t_start))
    return [path]


def _typical_state_dump(cfg, d, window, n_states, tol, accuracy):
    """One typical (median-P) centered eigenstate for inset plots."""
    op = floquet.build_floquet(d, window, tol=tol, accuracy=accuracy)
    eig = floquet.eigendecompose(op)
    pick, _ = floquet._centered_states(eig, op.L, n_states)
    dens = np.abs(eig.eigenvectors[:, pick]) ** 2
    p_vals = 1.0 / (dens ** 2).sum(axis=0)
    typical = pick[np.argsort(p_vals)[len(p_vals) // 2]]
    v = eig.eigenvectors[:, typical]
    l = op.sites()
    return [(int(l[i]), v[i].real, v[i].imag, abs(v[i]) ** 2) for i in range(op.L)]


def cmd_floquet_scan(cfg: dict) -> list:
    t_start = time.monotonic()
    beta = resolve_beta(cfg)
    j_x = float(cfg.get("j_x", 1.0))
    j_y = float(cfg.get("j_y", 1.0))
    alpha = float(cfg.get("alpha", FIG_ALPHA))
    window = int(cfg.get("window", 1024))
    n_states = int(cfg.get("n_states", 300))
    tol = float(cfg.get("tol", 1e-8))
    accuracy = cfg.get("accuracy")
    grid = _parse_grid(cfg.get("omega_grid", "0.9,0.8,0.7,0.6,0.5,0.4"), "omega_grid")
    name = cfg.get("name", "floquet-scan")
    scan = floquet.localization_scan(grid, beta, j_x=j_x, j_y=j_y, alpha=alpha,
                                     L=window, n_states=n_states, tol=tol,
                                     accuracy=accuracy)
    path = _out_path(cfg, name + ".csv")
    rows = zip(scan.control, scan.mean_p, scan.s_values,
               [n_states] * len(scan.control))
    extra = {"schema": "localization-scan/1", "control": "omega",
             "selection": "density centroid nearest window center",
             "edge_warnings": scan.edge_warnings}
    d0 = derive_params(params_from_split(grid[0], beta, j_x=j_x, j_y=j_y, alpha=alpha))
    write_csv(path, ("omega_or_alpha", "mean_P", "S", "n_states"), rows,
              _timed_meta(cfg, d0, extra, t_start))
    fit_path = _out_path(cfg, name + ".fit.json")
    write_meta(fit_path, {"fit": {"slope": scan.fit.slope,
                                  "intercept": scan.fit.intercept,
                                  "r2": scan.fit.r2},
                          "fit_x": "S/alpha", "fit_y": "log(mean_P)"})
    state_omega = float(cfg.get("state_omega", 0.6))
    d_state = derive_params(params_from_split(state_omega, beta, j_x=j_x,
                                              j_y=j_y, alpha=alpha))
    state_path = _out_path(cfg, name + "-state.csv")
    rows = _typical_state_dump(cfg, d_state, window, n_states, tol, accuracy)
    write_csv(state_path, ("l", "re", "im", "density"), rows,
              _timed_meta(cfg, d_state, {"schema": "eigenstate/1",
                                         "omega": state_omega}, t_start))
    return [path, fit_path, state_path]


def cmd_alpha_scan(cfg: dict) -> list:
    t_start = time.monotonic()
    beta = resolve_beta(cfg)
    omega = positive(cfg, "omega")
    j_x = float(cfg.get("j_x", 1.0))
    j_y = float(cfg.get("j_y", 1.0))
    window = int(cfg.get("window", 1024))
    n_states = int(cfg.get("n_states", 300))
    tol = float(cfg.get("tol", 1e-8))
    accuracy = cfg.get("accuracy")
    grid = _parse_grid(cfg.get("alpha_grid", "0.1,0.12,0.1545,0.2,0.25"), "alpha_grid")
    name = cfg.get("name", "alpha-scan")
    scan = floquet.alpha_scan(grid, omega, beta, j_x=j_x, j_y=j_y, L=window,
                              n_states=n_states, tol=tol, accuracy=accuracy)
    path = _out_path(cfg, name + ".csv")
    rows = zip(scan.control, scan.mean_p, scan.s_values,
               [n_states] * len(scan.control))
    d0 = derive_params(params_from_split(omega, beta, j_x=j_x, j_y=j_y,
                                         alpha=float(grid[0])))
    write_csv(path, ("omega_or_alpha", "mean_P", "S", "n_states"), rows,
              _timed_meta(cfg, d0, {"schema": "localization-scan/1",
                                    "control": "alpha",
                                    "edge_warnings": scan.edge_warnings}, t_start))
    fit_path = _out_path(cfg, name + ".fit.json")
    write_meta(fit_path, {"fit": {"slope": scan.fit.slope,
                                  "intercept": scan.fit.intercept,
                                  "r2": scan.fit.r2},
                          "fit_x": "1/alpha", "fit_y": "log(mean_P)"})
    return [path, fit_path]


def cmd_butterfly(cfg: dict) -> list:
    t_start = time.monotonic()
    q_max = int(cfg.get("q_max", 12))
    L = int(cfg.get("chain_length", 120))
    n_phases = int(cfg.get("n_phases", 6))
    j_x = float(cfg.get("j_x", 1.0))
    j_y = float(cfg.get("j_y", j_x))
    name = cfg.get("name", "butterfly.csv")
    fluxes = static_harper.coprime_fluxes(q_max)
    data = static_harper.butterfly(fluxes, j_x=j_x, j_y=j_y, L=L, n_phases=n_phases)
    path = _out_path(cfg, name)
    rows = [(int(p), int(q), e) for p, q, e in data]
    write_csv(path, ("alpha_num", "alpha_den", "energy"), rows,
              _timed_meta(cfg, None, {"schema": "butterfly/1", "q_max": q_max,
                                      "chain_length": L, "n_phases": n_phases,
                                      "j_x": j_x, "j_y": j_y}, t_start))
    return [path]


def cmd_aa_transition(cfg: dict) -> list:
    t_start = time.monotonic()
    ratios = [float(s) for s in str(cfg.get("ratios", "2.0,0.5,1.0")).split(",")]
    sizes = tuple(int(s) for s in str(cfg.get(
        "sizes", "233,377,610")).split(","))
    name = cfg.get("name", "aa-transition.csv")
    rows = []
    for ratio in ratios:
        rep = static_harper.localization_diagnostic(1.0, ratio, sizes=sizes)
        for L, mp in zip(rep.sizes, rep.mean_p):
            rows.append((L, ratio, mp, rep.classification))
    path = _out_path(cfg, name)
    write_csv(path, ("L", "jy_over_jx", "mean_P", "classification"), rows,
              _timed_meta(cfg, None, {"schema": "aa-transition/1",
                                      "alpha": static_harper.INV_GOLDEN,
                                      "sizes": list(sizes)}, t_start))
    return [path]


# ---------------------------------------------------------------------------
# repro: canned parameter sets from the figure captions

def _parse_grid(text, key) -> np.ndarray:
    try:
        vals = np.array([float(s) for s in str(text).split(",") if s.strip()])
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}")
    if len(vals) == 0:
        raise ConfigError(key, "empty grid")
    return vals


def cmd_repro(cfg: dict) -> list:
    figure = cfg.get("figure")
    return {"fig1": _repro_fig1, "fig2": _repro_fig2,
            "fig3": _repro_fig3, "fig4": _repro_fig4}[figure](cfg)


def _repro_fig1(cfg: dict) -> list:
    """Stroboscopic maps at J' = 2 pi 0.1545, omega = 0.3, both beta classes."""
    outputs = []
    grid = int(cfg.get("grid", 12))
    periods = int(cfg.get("periods", 300))
    for tag, beta in (("rational", BetaClass.rational(1, 3)),
                      ("irrational", BetaClass.golden())):
        sub = dict(cfg)
        sub.update({"omega": FIG_OMEGA1, "alpha": FIG_ALPHA, "j_x": 1.0, "j_y": 1.0,
                    "grid": grid, "periods": periods,
                    "name": f"fig1-{tag}.csv"})
        _set_beta(sub, beta)
        outputs += cmd_classical_map(sub)
    return outputs


def _set_beta(sub: dict, beta: BetaClass):
    sub.pop("beta_r", None)
    sub.pop("beta_q", None)
    sub.pop("beta_irrational", None)
    if beta.is_rational:
        sub["beta_r"] = beta.r
        sub["beta_q"] = beta.q
    else:
        sub["beta_irrational"] = beta.value


def _repro_fig2(cfg: dict) -> list:
    """A(omega) for both beta classes plus S(omega) for the irrational one."""
    t_start = time.monotonic()
    outputs = []
    members = int(cfg.get("members", 1000))
    base_periods = int(cfg.get("periods", 600))
    measure = int(cfg.get("measure_periods", 200))
    Omega = 2 * np.pi * FIG_ALPHA
    default_grid = ",".join(str(round(f * Omega, 6))
                            for f in (0.15, 0.25, 0.4, 0.6, 0.85, 1.5, 3.0, 6.0, 10.0))
    omegas = _parse_grid(cfg.get("omega_grid", default_grid), "omega_grid")
    seed = int(cfg["seed"])
    for tag, beta in (("rational", BetaClass.rational(1, 3)),
                      ("irrational", BetaClass.golden())):
        rows = []
        for om in omegas:
            d = derive_params(params_from_split(om, beta, alpha=FIG_ALPHA))
            ens = classical.Ensemble.uniform_cell(members, seed)
            periods = _fig2_periods(base_periods, om, Omega)
            t_grid = np.arange(periods + 1) * d.t_y
            sigma = classical.ensemble_dispersion(ens, t_grid, d, d.t_y / 100)
            fit = classical.spreading_rate(t_grid, sigma)
            if beta.is_rational or om >= Omega:
                s_val = float("nan")
            else:
                s_val = classical.island_scan(d, grid_nx=32, grid_np=32,
                                              t_measure=measure * d.t_y).S
            rows.append((om, fit.A, s_val, fit.residual))
        path = _out_path(cfg, f"fig2-{tag}.csv")
        d0 = derive_params(params_from_split(float(omegas[0]), beta, alpha=FIG_ALPHA))
        write_csv(path, ("omega", "A", "S", "residual"), rows,
                  _timed_meta(cfg, d0, {"schema": "spread-scan/1", "beta_kind": beta.kind,
                                        "dt_per_period": 100,
                                        "members": members, "seed": seed}, t_start))
        outputs.append(path)
    return outputs


def _fig2_periods(base: int, om: float, Omega: float) -> int:
    # high-frequency points spread slowly (A ~ omega^-(r+q-1)); give them
    # proportionally longer horizons so the linear fit dominates the offset
    if om <= 1.5 * Omega:
        return base
    return int(base * min(8.0, (om / (1.5 * Omega)) ** 2))


def _repro_fig3(cfg: dict) -> list:
    """Density histories at J_x=J_y=1, alpha=0.1545, omega=0.45, both betas."""
    outputs = []
    periods = int(cfg.get("periods", 500))
    window = int(cfg.get("window", 2048))
    for tag, beta in (("irrational", BetaClass.golden()),
                      ("rational", BetaClass.rational(1, 3))):
        sub = dict(cfg)
        sub.update({"omega": FIG_OMEGA3, "alpha": FIG_ALPHA, "j_x": 1.0, "j_y": 1.0,
                    "gauge": "eq2", "periods": periods, "window": window,
                    "name": f"fig3-{tag}"})
        _set_beta(sub, beta)
        outputs += cmd_quantum_evolve(sub)
    return outputs


def _repro_fig4(cfg: dict) -> list:
    """Participation-ratio scan at beta=(sqrt(5)-1)/4, J=1, alpha=0.1545."""
    sub = dict(cfg)
    sub.update({"alpha": FIG_ALPHA, "j_x": 1.0, "j_y": 1.0,
                "beta_irrational": golden_beta(),
                "name": "fig4-scan"})
    sub.setdefault("window", 1024)
    sub.setdefault("n_states", 300)
    return cmd_floquet_scan(sub)


if __name__ == "__main__":
    main()
