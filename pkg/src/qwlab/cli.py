"""
Command-line front end.

    qwlab simulate  --g0 1.5708 --steps 200 --out runs/fig1        # noiseless
    qwlab simulate  --g0 3.1416 --epsilon 2.23 --out runs/fig3     # ensemble
    qwlab dcurve    --g0 0 --method closed --out runs/fig2
    qwlab profile   --g0 3.1416 --epsilon 2.23 --out runs/fig4
    qwlab validate  --mode quick --out runs/validate

Exit status: 0 success, 1 failed validation, 2 usage or configuration error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import svg
from ._validation import DegenerateFormError, InvalidArgumentError, check_epsilon, check_spinor
from .config import RunConfig, resolve
from .ensemble import NoiseModel, ensemble_average, estimate_diffusion
from .profile import fit_profile
from .superoperator import G0Case, diffusion_closed, diffusion_quadrature
from .validation import run_validation
from .walk import WalkerState, build_coin, moments, position_distribution, step

DISTRIBUTION_HEADER = ("x", "probability", "stderr")
MOMENTS_HEADER = ("t", "mean_x", "mean_x2", "stderr_x2")
DCURVE_HEADER = ("epsilon", "D", "stderr")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _model(cfg):
    return NoiseModel(cfg.g0, cfg.epsilon, cfg.samples, cfg.seed)


def _analytic_d(g0, epsilon, cfg):
    try:
        return diffusion_closed(G0Case.parse(g0), epsilon)
    except InvalidArgumentError:
        return diffusion_quadrature(g0, epsilon, cfg.k_grid, cfg.g_nodes)


def _noiseless(cfg, spinor, steps):
    coin = build_coin(cfg.g0)
    state = WalkerState.localized(spinor)
    rows = []
    for t in range(1, steps + 1):
        state = step(state, coin)
        m = moments(position_distribution(state))
        rows.append((t, m.mean, m.second_moment, 0.0))
    dist = position_distribution(state)
    return dist, np.zeros_like(dist.probabilities), rows


def _profile_panels(x, p, title):
    keep = p > 0
    return [
        svg.Panel([svg.Series(x[keep], p[keep], markers=True)], xlabel="x", ylabel="P(x, t)", title=title),
        svg.Panel([svg.Series(x[keep], p[keep], markers=True)], xlabel="x", ylabel="P(x, t) (log)", logy=True),
    ]


def cmd_simulate(cfg):
    spinor = check_spinor(cfg.coin)
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.epsilon is None:
        steps = cfg.steps or 200
        dist, stderr, rows = _noiseless(cfg, spinor, steps)
        title = f"noiseless walk, g = {cfg.g0:.4f}, t = {steps}"
        analytic = None
    else:
        steps = cfg.steps or 500
        stats = ensemble_average(spinor, _model(cfg), steps, n_workers=cfg.threads)
        dist, stderr = stats.mean_distribution, stats.stderr_distribution
        rows = list(zip(stats.time_grid, stats.mean_x, stats.mean_x2, stats.stderr_x2))
        title = f"g0 = {cfg.g0:.4f}, eps = {cfg.epsilon:.4f}, N_s = {cfg.samples}, t = {steps}"
        analytic = _analytic_d(cfg.g0, check_epsilon(cfg.epsilon), cfg)
    _write_csv(os.path.join(cfg.out, "distribution.csv"), DISTRIBUTION_HEADER, zip(dist.positions, dist.probabilities, stderr))
    _write_csv(os.path.join(cfg.out, "moments.csv"), MOMENTS_HEADER, rows)
    cfg.save(os.path.join(cfg.out, "config.json"))

    svg.write(os.path.join(cfg.out, "distribution.svg"), _profile_panels(dist.positions, dist.probabilities, title))
    t = np.array([r[0] for r in rows], dtype=float)
    x2 = np.array([r[2] for r in rows])
    panel = svg.Panel(
        [svg.Series(t, x2 / t, label="<x^2>_t / t")],
        xlabel="t",
        ylabel="<x^2>_t / t",
        title=title,
        hlines=[analytic] if analytic is not None else [],
    )
    svg.write(os.path.join(cfg.out, "moments.svg"), [panel])
    return 0


def cmd_dcurve(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    eps_min = check_epsilon(cfg.eps_min)
    eps_max = check_epsilon(cfg.eps_max)
    grid = np.linspace(eps_min, eps_max, cfg.eps_points)
    rows = []
    if cfg.method == "closed":
        case = G0Case.parse(cfg.g0)
        rows = [(e, diffusion_closed(case, e), None) for e in grid]
    elif cfg.method == "quadrature":
        rows = [(e, diffusion_quadrature(cfg.g0, e, cfg.k_grid, cfg.g_nodes), None) for e in grid]
    elif cfg.method == "montecarlo":
        spinor = check_spinor(cfg.coin)
        steps = cfg.steps or 500
        for e in grid:
            stats = ensemble_average(spinor, NoiseModel(cfg.g0, e, cfg.samples, cfg.seed), steps, n_workers=cfg.threads)
            est = estimate_diffusion(stats, cfg.fit_window)
            rows.append((e, est.D, est.stderr))
    else:
        raise InvalidArgumentError(f"method must be closed, quadrature or montecarlo, got {cfg.method!r}")
    _write_csv(os.path.join(cfg.out, "dcurve.csv"), DCURVE_HEADER, rows)
    cfg.save(os.path.join(cfg.out, "config.json"))
    panel = svg.Panel(
        [svg.Series([r[0] for r in rows], [r[1] for r in rows], label=f"g0 = {cfg.g0:.4f} ({cfg.method})", markers=cfg.method == "montecarlo")],
        xlabel="epsilon",
        ylabel="D(epsilon)",
        title="asymptotic diffusion constant",
    )
    svg.write(os.path.join(cfg.out, "dcurve.svg"), [panel])
    return 0


def cmd_profile(cfg):
    if cfg.epsilon is None:
        raise InvalidArgumentError("profile needs --epsilon")
    spinor = check_spinor(cfg.coin)
    os.makedirs(cfg.out, exist_ok=True)
    steps = cfg.steps or 200
    stats = ensemble_average(spinor, _model(cfg), steps, n_workers=cfg.threads)
    dist = stats.mean_distribution
    fit = fit_profile(dist, cfg.exclusion, cfg.floor, cfg.margin)
    _write_csv(
        os.path.join(cfg.out, "profile.csv"),
        DISTRIBUTION_HEADER,
        zip(dist.positions, dist.probabilities, stats.stderr_distribution),
    )
    with open(os.path.join(cfg.out, "fit.json"), "w", encoding="utf-8") as fh:
        json.dump(fit.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    cfg.save(os.path.join(cfg.out, "config.json"))
    title = f"g0 = {cfg.g0:.4f}, eps = {cfg.epsilon:.4f}, t = {steps}: {fit.classification}"
    svg.write(os.path.join(cfg.out, "profile.svg"), _profile_panels(dist.positions, dist.probabilities, title))
    return 0


def cmd_validate(cfg, perturb_c22=0.0):
    report = run_validation(cfg.mode, perturb_c22=perturb_c22, seed=cfg.seed, log=print)
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    print("validation", "passed" if report.passed else "FAILED")
    return 0 if report.passed else 1


COMMANDS = {"simulate": cmd_simulate, "dcurve": cmd_dcurve, "profile": cmd_profile, "validate": cmd_validate}


def _coin_arg(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated reals: re,im,re,im")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number in {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", metavar="PATH", help="JSON config; flags override its values")
    common.add_argument("--g0", type=float, help="phase g (noiseless) or noise centre g0, radians")
    common.add_argument("--epsilon", type=float, help="noise half-width in (0, pi]; omit for a noiseless run")
    common.add_argument("--steps", type=int, help="number of time steps")
    common.add_argument("--samples", type=int, help="Monte Carlo trajectories N_s")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--coin", type=_coin_arg, metavar="RE,IM,RE,IM", help="initial coin state")
    common.add_argument("--method", choices=("closed", "quadrature", "montecarlo"))
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--k-grid", dest="k_grid", type=int, help="k points for quadrature")
    common.add_argument("--g-nodes", dest="g_nodes", type=int, help="Gauss-Legendre nodes in g")
    common.add_argument("--eps-min", dest="eps_min", type=float)
    common.add_argument("--eps-max", dest="eps_max", type=float)
    common.add_argument("--eps-points", dest="eps_points", type=int)
    common.add_argument("--fit-window", dest="fit_window", type=float)
    common.add_argument("--threads", type=int, help="worker threads (default QWLAB_THREADS or CPU count)")

    parser = argparse.ArgumentParser(prog="qwlab", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="noiseless or ensemble run: distribution.csv, moments.csv")
    sub.add_parser("dcurve", parents=[common], help="D(epsilon) curve: dcurve.csv")
    sub.add_parser("profile", parents=[common], help="averaged profile and shape fit: profile.csv, fit.json")
    val = sub.add_parser("validate", parents=[common], help="run the self-checks: report.json")
    val.add_argument("--mode", choices=("quick", "full"), default=argparse.SUPPRESS)
    val.add_argument("--perturb-c22", dest="perturb_c22", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    perturb = args.pop("perturb_c22", 0.0)
    if "coin" in args:
        args["coin"] = tuple(args["coin"])
    try:
        cfg = resolve(args, config_path)
        cfg = cfg.updated({"command": command})
        if command == "validate":
            return cmd_validate(cfg, perturb)
        return COMMANDS[command](cfg)
    except (InvalidArgumentError, DegenerateFormError) as exc:
        print(f"qwlab {command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
