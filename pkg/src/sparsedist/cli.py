"""Batch command-line front end: build/fit/sample/evaluate distributions, run
losses and the heteroscedastic regression, and drive the attention and
fusedmax demos, emitting plot-ready CSV/JSON.

Exit codes: 0 success, 2 usage error, 1 numeric failure (with a JSON error
record {code, message, context} on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import densities, fusedmax, losses
from .attention import (
    AttentionBasis,
    QuadraticScore,
    attention_backward_1d,
    attention_backward_2d,
    attention_forward_1d,
    attention_forward_2d,
    context,
    fit_value_function,
)
from .numerics import ConvergenceError
from .sampling import RngState, sample_beta_gaussian, write_samples_csv

_FIGURES = ("beta-gaussian-1d", "fit-vs-truth", "sobolev-rof", "regression-bands")


def _parse_vector(text: str) -> list:
    return [float(x) for x in text.split(",")]

def _parse_matrix(text: str) -> list:
    return [[float(x) for x in row.split(",")] for row in text.split(";")]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(path, text: str):
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _params_from_args(args) -> object:
    if getattr(args, "params", None):
        with open(args.params) as fh:
            return densities.from_json(json.load(fh))
    fam = args.family
    if fam is None:
        raise ValueError("either --params or --family is required")
    if fam == "beta_gaussian":
        return densities.make_beta_gaussian(args.alpha, _parse_vector(args.mu),
                                            _parse_matrix(args.sigma))
    if fam == "truncated_parabola":
        return densities.make_truncated_paraboloid(_parse_vector(args.mu),
                                                   _parse_matrix(args.sigma))
    if fam == "triangular":
        return densities.make_triangular(float(args.mu), args.b)
    if fam == "truncated_gaussian":
        return densities.make_truncated_gaussian(args.kappa, float(args.mu),
                                                 _parse_matrix(args.sigma)[0][0])
    if fam == "location_scale":
        return densities.location_scale_from_name(args.score, float(args.mu),
                                                  args.ls_sigma, kappa=args.kappa)
    if fam == "sparse_poisson":
        return densities.make_sparse_poisson(float(args.mu))
    if fam == "sparse_integer_gaussian":
        return densities.make_sparse_integer_gaussian(float(args.mu))
    raise ValueError(f"unknown family {fam!r}")


def _add_family_flags(sub):
    sub.add_argument("--params", help="JSON parameter file produced by `make`")
    sub.add_argument("--family", choices=[
        "beta_gaussian", "truncated_parabola", "triangular", "truncated_gaussian",
        "location_scale", "sparse_poisson", "sparse_integer_gaussian"])
    sub.add_argument("--alpha", type=float, default=2.0, help="entmax alpha in [1, 2]")
    sub.add_argument("--mu", default="0", help="location; comma-separated for N > 1")
    sub.add_argument("--sigma", default="1",
                     help="scale: variance, or matrix rows 'a,b;c,d'")
    sub.add_argument("--b", type=float, default=1.0, help="triangular width parameter")
    sub.add_argument("--kappa", type=float, default=None, help="truncated-Gaussian scale > 1")
    sub.add_argument("--score", default="parabola",
                     choices=["parabola", "abs", "scaled_gaussian"],
                     help="named location-scale score")
    sub.add_argument("--ls-sigma", type=float, default=1.0, help="location-scale sigma")


def _cmd_make(args) -> int:
    params = _params_from_args(args)
    _emit(args.output, json.dumps(densities.to_json(params), indent=2) + "\n")
    return 0


def _cmd_pdf(args) -> int:
    params = _params_from_args(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if args.at is not None:
        t = _parse_vector(args.at)
        value = params.pdf_one(np.array(t) if params.dim > 1 else t[0])
        writer.writerow(["p"])
        writer.writerow([repr(float(value))])
    else:
        lo, hi, num = args.grid
        ts = np.linspace(lo, hi, int(num))
        writer.writerow(["t", "p"])
        for t in ts:
            writer.writerow([repr(float(t)), repr(float(params.pdf_one(t)))])
    _emit(args.output, buf.getvalue())
    return 0


def _cmd_sample(args) -> int:
    params = _params_from_args(args)
    if not isinstance(params, densities.BetaGaussianParams):
        raise ValueError("sampling is implemented for beta-Gaussian families")
    rng = RngState(args.seed)
    pts = sample_beta_gaussian(params, args.n, rng)
    if args.output in (None, "-"):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"t_{i + 1}" for i in range(pts.shape[1])])
        for row in pts:
            writer.writerow([repr(float(x)) for x in row])
        sys.stdout.write(buf.getvalue())
    else:
        write_samples_csv(args.output, pts)
    return 0


def _cmd_fit(args) -> int:
    data = np.loadtxt(args.input, delimiter=",", skiprows=1, ndmin=2)
    fitted = losses.fit_moment_matching(data, args.alpha)
    _emit(args.output, json.dumps(densities.to_json(fitted), indent=2) + "\n")
    return 0


def _cmd_loss(args) -> int:
    mu_f = _parse_vector(args.mu_f)
    sigma_f = _parse_matrix(args.sigma_f)
    if args.y is not None:
        if len(mu_f) != 1:
            raise ValueError("point-target loss is univariate")
        value = losses.cross_omega_loss(mu_f[0], sigma_f[0][0], args.y, args.alpha)
        kind = "cross_omega"
    else:
        if args.target_params is None:
            raise ValueError("provide --y or --target-params")
        with open(args.target_params) as fh:
            target = densities.from_json(json.load(fh))
        if args.alpha == 1.0:
            value = losses.gaussian_kl(mu_f, sigma_f, target)
        else:
            value = losses.fy_loss_beta_gaussian(mu_f, sigma_f, target)
        kind = "fenchel_young"
    _emit(args.output, json.dumps({"loss": value, "kind": kind, "alpha": args.alpha}) + "\n")
    return 0


def _cmd_regress(args) -> int:
    data = np.loadtxt(args.input, delimiter=",", skiprows=1, ndmin=2)
    xs, ys = data[:, 0], data[:, 1]
    order = RngState(args.seed).generator.permutation(xs.size)
    n_hold = max(1, int(round(args.holdout * xs.size))) if args.holdout > 0 else 0
    hold, train = order[:n_hold], order[n_hold:]
    fit = losses.heteroscedastic_fit(xs[train], ys[train], args.alpha,
                                     init=tuple(_parse_vector(args.init)),
                                     steps=args.steps, step_size=args.step_size)
    coeffs = (fit.w_mu, fit.b_mu, fit.w_sigma, fit.b_sigma)
    heldout = (losses.heteroscedastic_loss(coeffs, xs[hold], ys[hold], args.alpha)
               if n_hold else None)
    out = {
        "w_mu": fit.w_mu, "b_mu": fit.b_mu,
        "w_sigma": fit.w_sigma, "b_sigma": fit.b_sigma,
        "alpha": args.alpha,
        "train_loss": fit.train_loss,
        "heldout_loss": heldout,
    }
    _emit(args.output, json.dumps(out, indent=2) + "\n")
    return 0


def _cmd_attention_demo(args) -> int:
    if args.input == "-":
        payload = json.load(sys.stdin)
    else:
        with open(args.input) as fh:
            payload = json.load(fh)
    alpha = float(payload["alpha"])
    score = QuadraticScore.from_moments(payload["mu"], payload["sigma"], alpha)
    basis = AttentionBasis.from_components(
        [(c["mu"], c["sigma"]) for c in payload["basis"]])
    if score.dim == 1:
        r = attention_forward_1d(score, basis)
        jac = attention_backward_1d(score, basis)
    elif score.dim == 2:
        r = attention_forward_2d(score, basis)
        jac = attention_backward_2d(score, basis)
    else:
        raise ValueError("attention demo supports N in {1, 2}")
    out = {"r": r.tolist(), "jacobian": jac.tolist()}
    if "H" in payload:
        h_matrix = np.asarray(payload["H"], dtype=float)
        lam = float(payload.get("lambda", 0.1))
        if score.dim != 1:
            raise ValueError("value-function fitting in the demo is 1-d only")
        locations = np.linspace(0.0, 1.0, h_matrix.shape[1])
        b_matrix = fit_value_function(h_matrix, locations, basis, lam)
        out["context"] = context(b_matrix, r).tolist()
    _emit(args.output, json.dumps(out, indent=2) + "\n")
    return 0


def _cmd_fusedmax_demo(args) -> int:
    lo, hi, num = args.grid
    ts = np.linspace(lo, hi, int(num))
    summary = {"score": args.score, "sigma": args.sigma, "gamma": args.gamma,
               "mode": args.mode}
    if args.mode == "rof":
        score = (fusedmax.parabola_score(args.sigma) if args.score == "parabola"
                 else fusedmax.abs_score(args.sigma))
        dens = fusedmax.rof_fusedmax(score, args.gamma)
        ps = dens(ts)
        summary.update({"a": dens.a, "b": dens.b, "tau": dens.tau})
    elif args.mode == "sobolev":
        dens = fusedmax.sobolev_smooth(args.score, args.sigma, args.gamma)
        ps = dens(ts)
        summary.update({"a": 0.0, "b": dens.b, "tau": dens.tau, "C": dens.c_coef})
    else:
        score = (fusedmax.parabola_score(args.sigma) if args.score == "parabola"
                 else fusedmax.abs_score(args.sigma))
        h = args.grid_h
        grid = np.arange(lo, hi + 0.5 * h, h)
        probs = fusedmax.discrete_fusedmax(np.array([score.f(t) for t in grid]),
                                           args.gamma, h)
        ps = np.interp(ts, grid, probs)
        summary.update({"grid_h": h, "n_grid": int(grid.size)})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "p"])
    for t, p in zip(ts, ps):
        writer.writerow([repr(float(t)), repr(float(p))])
    _emit(args.out_csv, buf.getvalue())
    _emit(args.out_json, json.dumps(summary) + "\n")
    return 0


def _figure_rows(name: str, seed: int):
    if name == "beta-gaussian-1d":
        rows = [("t", "alpha", "p")]
        ts = np.linspace(-4.0, 4.0, 401)
        for alpha in (1.0, 4.0 / 3.0, 1.5, 2.0):
            params = densities.make_beta_gaussian(alpha, [0.0], [[1.0]])
            for t in ts:
                rows.append((repr(float(t)), repr(alpha), repr(float(params.pdf_one(t)))))
        return rows
    if name == "fit-vs-truth":
        truth = densities.make_beta_gaussian(2.0, [0.0], [[2.0 / 3.0]])
        pts = sample_beta_gaussian(truth, 10000, RngState(seed))
        fitted = losses.fit_moment_matching(pts, 2.0)
        rows = [("t", "truth_p", "fit_p")]
        for t in np.linspace(-1.5, 1.5, 301):
            rows.append((repr(float(t)), repr(float(truth.pdf_one(t))),
                         repr(float(fitted.pdf_one(t)))))
        return rows
    if name == "sobolev-rof":
        rows = [("t", "mode", "gamma", "p")]
        ts = np.linspace(-3.0, 3.0, 301)
        for gamma in (0.1, 0.5, 1.0):
            rof = fusedmax.rof_fusedmax(fusedmax.parabola_score(1.0), gamma)
            sob = fusedmax.sobolev_smooth("parabola", 1.0, gamma)
            for t in ts:
                rows.append((repr(float(t)), "rof", repr(gamma), repr(float(rof.pdf_one(t)))))
                rows.append((repr(float(t)), "sobolev", repr(gamma), repr(float(sob.pdf_one(t)))))
        return rows
    if name == "regression-bands":
        rng = RngState(seed)
        xs = rng.generator.uniform(0.0, 1.0, 400)
        noise = densities.make_beta_gaussian(2.0, [0.0], [[1.0]])
        eps = sample_beta_gaussian(noise, xs.size, rng)[:, 0]
        ys = 2.0 * xs + (0.1 + 0.5 * xs) * eps
        fit = losses.heteroscedastic_fit(xs, ys, 2.0, init=(0.0, 0.0, 0.2, 0.2),
                                         steps=400, step_size=0.05)
        radius = densities.beta_gaussian_radius(1, 2.0)
        rows = [("x", "y", "mu_f", "lo", "hi")]
        for x, y in zip(xs, ys):
            mu_f = fit.w_mu * x + fit.b_mu
            sig_sq = (fit.w_sigma * x + fit.b_sigma) ** 2
            half = radius * sig_sq ** (1.0 / 3.0)
            rows.append((repr(float(x)), repr(float(y)), repr(float(mu_f)),
                         repr(float(mu_f - half)), repr(float(mu_f + half))))
        return rows
    raise ValueError(f"unknown figure {name!r}")


def _cmd_figure(args) -> int:
    rows = _figure_rows(args.name, args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    _emit(args.output, buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsedist",
        description="Sparse continuous distributions: construct, sample, fit, "
                    "evaluate losses, and run attention/fusedmax demos.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("make", help="construct a distribution and print its JSON record")
    _add_family_flags(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_make)

    p = subs.add_parser("pdf", help="evaluate a density pointwise or on a grid")
    _add_family_flags(p)
    p.add_argument("--at", help="evaluation point (comma-separated for N > 1)")
    p.add_argument("--grid", nargs=3, type=float, metavar=("LO", "HI", "N"),
                   default=(-3.0, 3.0, 121))
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_pdf)

    p = subs.add_parser("sample", help="draw i.i.d. samples and write CSV")
    _add_family_flags(p)
    p.add_argument("-n", type=int, default=1000, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_sample)

    p = subs.add_parser("fit", help="moment-matching fit of a beta-Gaussian to sample CSV")
    p.add_argument("--input", required=True, help="CSV with header t_1..t_N")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_fit)

    p = subs.add_parser("loss", help="Fenchel-Young or cross-Omega loss evaluation")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mu-f", required=True, help="score location")
    p.add_argument("--sigma-f", required=True, help="score scale (variance or matrix)")
    p.add_argument("--y", type=float, help="point target (cross-Omega)")
    p.add_argument("--target-params", help="JSON target distribution (Fenchel-Young)")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_loss)

    p = subs.add_parser("regress", help="heteroscedastic regression on x,y CSV")
    p.add_argument("--input", required=True, help="CSV with header x,y")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--init", default="0,0,0.2,0.2", help="w_mu,b_mu,w_sigma,b_sigma")
    p.add_argument("--holdout", type=float, default=0.1, help="held-out fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_regress)

    p = subs.add_parser("attention-demo",
                        help="forward/backward attention kernels from a JSON input file")
    p.add_argument("--input", default="-",
                   help="JSON {alpha, mu, sigma, basis:[{mu,sigma}], H?, lambda?}")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_attention_demo)

    p = subs.add_parser("fusedmax-demo", help="ROF / Sobolev / discrete fusedmax curves")
    p.add_argument("--score", choices=["parabola", "abs"], default="parabola")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--mode", choices=["rof", "sobolev", "discrete"], default="rof")
    p.add_argument("--grid-h", type=float, default=1e-2, help="discrete mode grid width")
    p.add_argument("--grid", nargs=3, type=float, metavar=("LO", "HI", "N"),
                   default=(-3.0, 3.0, 241))
    p.add_argument("--out-csv", default="-")
    p.add_argument("--out-json", default="-")
    p.set_defaults(func=_cmd_fusedmax_demo)

    p = subs.add_parser("figure", help="emit plot-ready data for a named figure")
    p.add_argument("--name", choices=_FIGURES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_figure)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ConvergenceError, OSError, KeyError, json.JSONDecodeError) as exc:
        record = {"code": type(exc).__name__, "message": str(exc),
                  "context": {"command": args.command}}
        sys.stderr.write(json.dumps(record) + "\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
