"""Command-line front end.

    bdssd validate CHAIN
    bdssd eigen CHAIN
    bdssd dual {classical,anti,spectral} CHAIN [--eta X | --margin M]
    bdssd absorb CHAIN {--pmf | --cdf | --pgf U | --occupation U0,U1,...}
    bdssd simulate CHAIN --replicas N --seed S [--coordinate-dual] [--trajectories K --trajectory-csv PATH]
    bdssd verify CHAIN [--profile exact|full]

CHAIN is a chain-spec JSON file or a built-in fixture name (e2, e2c,
e2c-absorbing, cex, d1).  Reports are JSON by default; tables may be CSV.
Exit status: 0 success, 1 a check failed, 2 usage error, 3 unreadable or
invalid input, 4 a precondition or numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__, coupling
from ._accel import backend_name
from .absorption import (
    absorption_cdf_continuous,
    absorption_pmf,
    auto_time_grid,
    discretized_cdf,
    gaussian_split_residual,
    geometric_convolution,
    hitting_laplace,
    hypoexponential_cdf,
    lazy_pgf_identity_check,
    occupation_laplace,
    pgf_product,
)
from .core import DiscreteKernel, auto_eps, stationary_pmf
from .duality import (
    anti_dual,
    anti_dual_generator,
    classical_dual,
    classical_dual_generator,
    spectral_dual_discrete,
    spectral_dual_generator,
)
from .errors import BDError, ParseError, ValidationError
from .specfile import env_mode, parse_chain_spec
from .spectral import eigenvalues_discrete, eigenvalues_generator

log = logging.getLogger("bdssd")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3, 4
CHECK_TOL = 1e-10
NEG_EIG_TOL = 1e-12


def _nonneg(thetas):
    """Eigenvalues with roundoff below zero set to 0, or None if one is genuinely negative."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size and thetas.min() < -NEG_EIG_TOL:
        return None
    return np.maximum(thetas, 0.0)


# ----------------------------------------------------------- output ----


def fmt(x) -> str:
    """17 significant digits, '.' decimal point, independent of locale."""
    return format(float(x), ".17g")


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(fmt(x))
    return obj


def matrix_out(m):
    return [[jsonable(x) for x in row] for row in np.asarray(m, dtype=object)]


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class Outcome:
    """Payload plus the pieces needed to render it."""

    def __init__(self, results, table=None, warnings=(), failed=False):
        self.results = results
        self.table = table  # (header, rows) for CSV output
        self.warnings = list(warnings)
        self.failed = failed


# ----------------------------------------------------- subcommands ----


def _chain(args):
    return parse_chain_spec(args.chain, mode=args.mode)


def _kind(chain):
    return "discrete" if isinstance(chain, DiscreteKernel) else "continuous"


def cmd_validate(args):
    chain = _chain(args)
    if isinstance(chain, DiscreteKernel):
        rep = chain.report
        return Outcome({"chain": chain.to_spec(), "report": rep.to_dict()}, failed=not rep.ok)
    res = {
        "chain": chain.to_spec(),
        "report": {"absorbing_top": chain.absorbing_top, "ergodic": chain.ergodic, "violations": []},
    }
    return Outcome(res)


def _spectrum(chain):
    return eigenvalues_discrete(chain) if isinstance(chain, DiscreteKernel) else eigenvalues_generator(chain)


def cmd_eigen(args):
    chain = _chain(args)
    spec = _spectrum(chain)
    res = {"kind": spec.kind, "eigenvalues": spec.to_list(), "nontrivial": list(spec.nontrivial)}
    rows = [(i, float(v)) for i, v in enumerate(spec.values)]
    return Outcome(res, table=(["index", "eigenvalue"], rows))


def _pair_out(pair):
    return {
        "construction": pair.kind,
        "time": pair.time,
        "primal": pair.primal.to_spec(),
        "dual": pair.dual.to_spec(),
        "link": matrix_out(pair.link.matrix),
        "sharp": pair.link.sharp,
        "intertwining_residual": pair.residual,
    }


def cmd_dual(args):
    chain = _chain(args)
    discrete = isinstance(chain, DiscreteKernel)
    warns = []
    if args.construction == "classical":
        pair = classical_dual(chain) if discrete else classical_dual_generator(chain)
        return Outcome(_pair_out(pair))
    if args.construction == "spectral":
        pair = spectral_dual_discrete(chain) if discrete else spectral_dual_generator(chain)
        return Outcome(_pair_out(pair))
    h_top = None if args.eta is None else 1 - _number(args.eta, chain.mode)
    if discrete:
        res = anti_dual(chain, margin=args.margin, h_top=h_top)
    else:
        if args.margin != DEFAULT_MARGIN:
            warns.append("--margin has no effect in continuous time; use --eta")
        res = anti_dual_generator(chain, h_top=h_top)
    warns += list(res.warnings)
    out = _pair_out(res.pair)
    out.update({"construction": "anti", "H": list(res.H), "eta": res.eta, "margin": res.margin})
    if res.discretized_residual is not None:
        out["discretized_residual"] = res.discretized_residual
    return Outcome(out, warnings=warns)


def _number(text, mode):
    try:
        x = Fraction(str(text))
    except ValueError as exc:
        raise ParseError(f"not a number: {text!r}") from exc
    return x if mode == "rational" else float(x)


def _times(args, nus):
    if args.times:
        parts = args.times.split(":")
        if len(parts) == 3:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
        return np.array([float(t) for t in args.times.split(",")])
    return auto_time_grid(nus)


def cmd_absorb(args):
    chain = _chain(args)
    if isinstance(chain, DiscreteKernel):
        if args.occupation is not None:
            raise ParseError("--occupation applies to continuous chains", field="occupation")
        pmf = absorption_pmf(chain, tol=args.tol)
        if args.pgf is not None:
            u = float(args.pgf)
            return Outcome({"u": u, "pgf": pmf.pgf(u), "tail": pmf.tail})
        if args.cdf:
            rows = list(enumerate(pmf.cdf().tolist()))
            return Outcome({"horizon": pmf.horizon, "tail": pmf.tail, "cdf": [r[1] for r in rows]},
                           table=(["t", "cdf"], rows))
        rows = list(enumerate(pmf.weights.tolist()))
        return Outcome({"horizon": pmf.horizon, "tail": pmf.tail, "mean": pmf.mean(), "pmf": [r[1] for r in rows]},
                       table=(["t", "pmf"], rows))
    if args.pgf is not None:
        raise ParseError("--pgf applies to discrete chains; use --occupation for transforms", field="pgf")
    if args.occupation is not None:
        u = [float(x) for x in args.occupation.split(",")]
        value = occupation_laplace(chain, u)
        return Outcome({"u": u, "laplace": value})
    nus = eigenvalues_generator(chain).nontrivial
    times = _times(args, nus)
    cdf = absorption_cdf_continuous(chain, times, tol=args.tol)
    rows = list(zip(cdf.times.tolist(), cdf.values.tolist()))
    return Outcome({"times": cdf.times, "cdf": cdf.values}, table=(["t", "cdf"], rows))


def cmd_simulate(args):
    chain = _chain(args)
    report = coupling.monte_carlo_sst(chain, args.replicas, args.seed, coordinate_dual=args.coordinate_dual)
    res = report.to_dict()
    res["checks"] = report.checks()
    if args.trajectory_csv:
        rows = []
        for rep in range(args.trajectories):
            rng = coupling.RngSpec(args.seed, rep)
            if args.coordinate_dual:
                tr = coupling.run_coordinate_dual(chain.d, rng)
            elif isinstance(chain, DiscreteKernel):
                tr = coupling.run_coupled_discrete(chain, rng)
            else:
                tr = coupling.run_coupled_continuous(chain, rng)
            rows += [(rep, t, x, xh) for t, x, xh in tr.to_rows()]
        text = csv_text(["replica", "time", "x", "xhat"], rows)
        with open(args.trajectory_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        res["trajectory_csv"] = args.trajectory_csv
    return Outcome(res, failed=not all(res["checks"].values()))


# ------------------------------------------------------------ verify ----


class Battery:
    """Named checks with measured values; failures are recorded, not raised."""

    def __init__(self):
        self.checks = []

    def run(self, name, fn, threshold=CHECK_TOL):
        try:
            value = fn()
        except BDError as exc:
            self.checks.append({"name": name, "status": "error", "error": f"{name}: {type(exc).__name__}: {exc}"})
            return None
        if isinstance(value, bool):
            status = "pass" if value else "fail"
            self.checks.append({"name": name, "status": status})
        else:
            status = "pass" if value <= threshold else "fail"
            self.checks.append({"name": name, "status": status, "value": value, "threshold": threshold})
        return value

    def skip(self, name, reason):
        self.checks.append({"name": name, "status": "skipped", "reason": reason})

    @property
    def failed(self):
        return any(c["status"] in ("fail", "error") for c in self.checks)

    @property
    def errored(self):
        return any(c["status"] == "error" for c in self.checks)


def _grid_pgf(chain, thetas):
    pmf = absorption_pmf(chain)
    grid = np.linspace(-0.9, 0.9, 21)[1:]
    return max(abs(pmf.pgf(u) - pgf_product(thetas, u)) for u in grid)


def _verify_absorbing_discrete(b, P, profile, args):
    spec = eigenvalues_discrete(P)
    thetas = spec.nontrivial
    b.run("pgf grid vs eigenvalue product", lambda: _grid_pgf(P, thetas), 1e-9)
    pos = _nonneg(thetas)
    if pos is None:
        b.skip("pmf vs geometric convolution", "skipped: negative eigenvalue, no geometric representation")
    else:
        b.run("pmf vs geometric convolution",
              lambda: absorption_pmf(P).l1_distance(geometric_convolution(pos)), 1e-9)
        b.run("mean identity",
              lambda: abs(absorption_pmf(P).mean() - float(np.sum(1 / (1 - pos)))), 1e-9)
    eps = min(0.5, 0.5 / (1.0 - float(thetas.min())))
    b.run(f"lazy pgf identity (eps={fmt(eps)}, s=0.5)", lambda: lazy_pgf_identity_check(P, eps, 0.5), 1e-9)
    rep = P.report
    if rep.strictly_monotone:
        anti = b.run("anti-dual construction", lambda: anti_dual(P).pair.residual)
        if anti is not None:
            res = anti_dual(P)
            b.run("anti-dual roundtrip", lambda: _same(classical_dual(res.primal).dual, P))
            if profile == "full":
                _mc_discrete(b, res.primal, args)
    else:
        b.skip("anti-dual roundtrip", "skipped: kernel is not strictly monotone")


def _same(a, b):
    if a.mode == b.mode == "rational":
        return a == b
    return float(np.max(np.abs(a.as_float().matrix() - b.as_float().matrix()))) <= CHECK_TOL


def _mc_discrete(b, P, args):
    if _nonneg(eigenvalues_discrete(P.as_float()).values) is None:
        b.skip("Monte Carlo coupling", "skipped: negative eigenvalue, coupling needs a nonnegative spectrum")
        return
    try:
        rep = coupling.monte_carlo_sst(P, args.replicas, args.seed)
    except BDError as exc:
        b.checks.append({"name": "Monte Carlo coupling", "status": "error", "error": f"Monte Carlo coupling: {exc}"})
        return
    for key, ok in rep.checks().items():
        b.checks.append({"name": f"MC {key}", "status": "pass" if ok else "fail", "report": rep.to_dict()})


def _verify_ergodic_discrete(b, P, profile, args):
    spec = eigenvalues_discrete(P)
    if P.report.monotone:
        r = b.run("classical dual intertwining", lambda: classical_dual(P).residual)
        if r is not None:
            pair = classical_dual(P)
            Pstar = pair.dual
            thetas = eigenvalues_discrete(Pstar.as_float()).nontrivial
            b.run("dual absorption pgf grid", lambda: _grid_pgf(Pstar, thetas), 1e-9)
            pos = _nonneg(thetas)
            if pos is not None:
                b.run("dual pmf vs geometric convolution",
                      lambda: absorption_pmf(Pstar).l1_distance(geometric_convolution(pos)), 1e-9)
            else:
                b.skip("dual pmf vs geometric convolution", "skipped: negative eigenvalue")
            if Pstar.report.strictly_monotone:
                h_top = sum(stationary_pmf(P).weights[:-1])
                b.run("anti-dual roundtrip", lambda: _same(anti_dual(Pstar, h_top=h_top).primal, P))
            else:
                b.skip("anti-dual roundtrip", "skipped: classical dual is not strictly monotone")
    else:
        b.skip("classical dual intertwining", "skipped: kernel is not monotone")
    if _nonneg(spec.nontrivial) is None:
        b.skip("spectral dual intertwining", "skipped: negative eigenvalue")
        return
    r = b.run("spectral dual intertwining", lambda: spectral_dual_discrete(P).residual)
    if r is not None:
        qf = spectral_dual_discrete(P).qfamily
        b.run("Q family nonnegativity", lambda: max(0.0, -qf.min_entry))
        b.run("Q_d rows equal pi", lambda: qf.stationary_residual)
        if profile == "full":
            _mc_discrete(b, P, args)


def _verify_continuous(b, G, profile, args):
    if G.absorbing_top:
        nus = eigenvalues_generator(G).nontrivial
        times = auto_time_grid(nus)
        b.run("cdf vs hypoexponential",
              lambda: absorption_cdf_continuous(G, times).sup_distance(hypoexponential_cdf(nus, times)), 1e-8)
        s = 1.0
        b.run("occupation transform at u=(s,...,s) vs hitting transform",
              lambda: abs(occupation_laplace(G, [s] * G.d) - float(np.prod(nus / (nus + s)))), 1e-10)
        u = np.linspace(0.5, 2.0, G.d)
        if all(float(m) > 0 for m in G.death[: G.d - 1]):
            b.run("Gaussian split identity", lambda: gaussian_split_residual(G, u), 1e-10)
        else:
            b.skip("Gaussian split identity", "skipped: a death rate below d is zero, so G_0 is not symmetrizable")
        eps = auto_eps(G.as_float())
        ref = absorption_cdf_continuous(G, times)
        dists = []

        def bridge():
            dists.extend(discretized_cdf(G, eps / k, times).sup_distance(ref) for k in (1, 2, 4))
            return bool(dists[0] > dists[1] > dists[2])

        b.run("discretization bridge decreases", bridge)
        if all(float(m) > 0 for m in G.death[: G.d - 1]):
            res = b.run("anti-dual construction", lambda: anti_dual_generator(G).pair.residual)
            if res is not None and profile == "full":
                _mc_continuous(b, anti_dual_generator(G).primal, args)
        else:
            b.skip("anti-dual construction", "skipped: a death rate below d is zero")
        if profile == "full":
            est, se = coupling.occupation_mc(G, u, args.replicas, args.seed)
            exact = occupation_laplace(G, u)
            b.checks.append({"name": "MC occupation transform", "status": "pass" if abs(est - exact) <= 3 * se else "fail",
                             "value": abs(est - exact), "threshold": 3 * se})
        return
    if not G.ergodic:
        b.skip("continuous identities", "skipped: generator is neither ergodic nor absorbing at the top")
        return
    b.run("classical dual intertwining", lambda: classical_dual_generator(G).residual)
    Gstar = classical_dual_generator(G).dual
    nus = eigenvalues_generator(G).nontrivial
    times = auto_time_grid(nus)
    b.run("dual hitting cdf vs hypoexponential",
          lambda: absorption_cdf_continuous(Gstar, times).sup_distance(hypoexponential_cdf(nus, times)), 1e-8)
    b.run("dual hitting transform vs eigenvalue product",
          lambda: abs(hitting_laplace(Gstar, 1.0) - float(np.prod(nus / (nus + 1.0)))), 1e-10)
    r = b.run("spectral dual intertwining", lambda: spectral_dual_generator(G).residual)
    if r is not None:
        qf = spectral_dual_generator(G).qfamily
        b.run("Q family nonnegativity", lambda: max(0.0, -qf.min_entry))
        b.run("Q_d rows equal pi", lambda: qf.stationary_residual)
    if profile == "full":
        _mc_continuous(b, G, args)


def _mc_continuous(b, G, args):
    try:
        rep = coupling.monte_carlo_sst(G, args.replicas, args.seed)
    except BDError as exc:
        b.checks.append({"name": "Monte Carlo coupling", "status": "error", "error": f"Monte Carlo coupling: {exc}"})
        return
    for key, ok in rep.checks().items():
        b.checks.append({"name": f"MC {key}", "status": "pass" if ok else "fail", "report": rep.to_dict()})


def cmd_verify(args):
    chain = _chain(args)
    b = Battery()
    if isinstance(chain, DiscreteKernel):
        rep = chain.report
        b.run("validation", lambda: rep.ok)
        if rep.absorbing_top:
            _verify_absorbing_discrete(b, chain, args.profile, args)
        elif rep.ergodic:
            _verify_ergodic_discrete(b, chain, args.profile, args)
        else:
            b.skip("identity battery", "skipped: kernel is neither ergodic nor absorbing at the top")
    else:
        _verify_continuous(b, chain, args.profile, args)
    res = {"profile": args.profile, "kind": _kind(chain), "checks": b.checks,
           "passed": sum(c["status"] == "pass" for c in b.checks),
           "failed": sum(c["status"] in ("fail", "error") for c in b.checks),
           "skipped": sum(c["status"] == "skipped" for c in b.checks)}
    out = Outcome(res, failed=b.failed)
    out.errored = b.errored
    return out


# ------------------------------------------------------------ parser ----

DEFAULT_MARGIN = 1e-3


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--chain", dest="chain_opt", help="same as the positional CHAIN")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--mode", choices=("rational", "float"), help="numeric mode (default: file or $BD_NUMERIC_MODE)")
    common.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    p = argparse.ArgumentParser(prog="bdssd", description="Strong stationary duality for birth-and-death chains")
    p.add_argument("--version", action="version", version=f"bdssd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def chain_arg(sp):
        sp.add_argument("chain", nargs="?", help="chain-spec JSON file or fixture name")
        return sp

    chain_arg(sub.add_parser("validate", parents=[common], help="classify a chain"))
    chain_arg(sub.add_parser("eigen", parents=[common], help="spectrum of P or -G"))

    d = sub.add_parser("dual", parents=[common], help="construct a dual")
    d.add_argument("construction", choices=("classical", "anti", "spectral"))
    chain_arg(d)
    g = d.add_mutually_exclusive_group()
    g.add_argument("--eta", help="anti-dual: fix H_(d-1) = 1 - eta")
    g.add_argument("--margin", type=float, default=DEFAULT_MARGIN, help="anti-dual: minimum hold probability")

    a = sub.add_parser("absorb", parents=[common], help="absorption-time law")
    chain_arg(a)
    g = a.add_mutually_exclusive_group()
    g.add_argument("--pmf", action="store_true", help="discrete pmf (default for kernels)")
    g.add_argument("--cdf", action="store_true", help="cdf (default for generators)")
    g.add_argument("--pgf", metavar="U", help="E U^T for a kernel")
    g.add_argument("--occupation", metavar="U0,U1,...", help="E exp(-<u,T>) for a generator")
    a.add_argument("--times", help="cdf grid as start:stop:count or a comma list")
    a.add_argument("--tol", type=float, default=1e-12)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo coupling check")
    chain_arg(s)
    s.add_argument("--replicas", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--coordinate-dual", action="store_true")
    s.add_argument("--trajectory-csv", help="write the first --trajectories paths here")
    s.add_argument("--trajectories", type=int, default=10)

    v = sub.add_parser("verify", parents=[common], help="identity battery")
    chain_arg(v)
    v.add_argument("--profile", choices=("exact", "full"), default="exact")
    v.add_argument("--replicas", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    return p


HANDLERS = {
    "validate": cmd_validate,
    "eigen": cmd_eigen,
    "dual": cmd_dual,
    "absorb": cmd_absorb,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "chain_opt"}
    cfg["mode"] = args.mode
    return cfg


def render(args, outcome: Outcome | None, error=None) -> str:
    if args.format == "csv" and outcome is not None and outcome.table is not None and error is None:
        header, rows = outcome.table
        return csv_text(header, rows)
    report = {
        "command": _config(args),
        "results": None if outcome is None else outcome.results,
        "warnings": [] if outcome is None else outcome.warnings,
        "status": "error" if error else ("failed" if outcome and outcome.failed else "ok"),
    }
    if error:
        report["error"] = error
    return json.dumps(jsonable(report), indent=2, allow_nan=False) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    args.chain = args.chain or args.chain_opt
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.chain:
        sys.stderr.write("error: a chain file or fixture name is required\n")
        return EXIT_USAGE
    try:
        args.mode = args.mode or env_mode()
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    log.info("resolved configuration: %s", json.dumps(jsonable(_config(args)), sort_keys=True))
    log.info("kernel backend: %s", backend_name())

    outcome, error, code = None, None, EXIT_OK
    try:
        outcome = HANDLERS[args.command](args)
        if getattr(outcome, "errored", False):
            code = EXIT_NUMERIC
        elif outcome.failed:
            code = EXIT_CHECK
    except (ParseError, ValidationError, OSError) as exc:
        error, code = f"{type(exc).__name__}: {exc}", EXIT_INPUT
    except BDError as exc:
        error, code = f"{type(exc).__name__}: {exc}", EXIT_NUMERIC
    text = render(args, outcome, error)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if error:
        sys.stderr.write(f"error: {error}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
