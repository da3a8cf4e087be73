"""``sdd-dp`` command line front end.

Reads a JSON experiment config, validates its ``params`` against the
command's schema, runs the computation and writes JSON or CSV atomically.
Exit status is 0 on success, 1 on a computational failure and 2 on a bad
config; failures print a one-line JSON error to stderr.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import jsonschema
import numpy as np
from threadpoolctl import threadpool_limits

from . import discounting as disc
from .dpcore import howard, vfi
from .exceptions import ConfigInvalid, InvalidChainError, LengthMismatch, RadiusNotCertified, SDDError
from .experiments import oracle_check
from .markov import AR1Spec, FiniteMarkovChain, rouwenhorst, stationary_distribution
from .models.ez import EZParams, build_ez, ez_initial_value
from .models.growth import GrowthParams, build_growth, cobb_douglas
from .models.homogeneous import HomogeneousParams, build_homogeneous_profile
from .models.search import ACCEPT, SearchParams, build_search
from .models.tax import TaxParams, build_tax
from .models.truncation import TruncationLadder, solve_truncated
from .models.utility import from_dict as utility_from_dict
from .schemas import CONFIG, PARAMS
from .validation import make_grid

logger = logging.getLogger("sdd_dp.cli")

COMMANDS = tuple(sorted(PARAMS))
DEFAULTS = {"tol": 1e-8, "max_iter": 100_000, "spectral_tol": 1e-6, "seed": 0}
BENCHMARK_RHO = {"start": 0.9, "stop": 0.99, "num": 10}
BENCHMARK_SIGMA = {"start": 0.001, "stop": 0.01, "num": 10}


class Result:
    """Payload for one command: a JSON-able dict and optional CSV rows."""

    def __init__(self, data, header=None, rows=None):
        self.data = data
        self.header = header
        self.rows = rows

    def render(self, fmt):
        if fmt == "json":
            return json.dumps(_clean(self.data), indent=2, sort_keys=True, allow_nan=False) + "\n"
        if self.header is None:
            header, row = _flatten(self.data)
            self.header, self.rows = header, [row]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def _clean(obj):
    """Replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else ""
    return x


def _flatten(data, prefix=""):
    header, row = [], []
    for k in sorted(data):
        v = data[k]
        if isinstance(v, dict):
            h, r = _flatten(v, f"{prefix}{k}.")
            header += h
            row += r
        elif not isinstance(v, (list, tuple, np.ndarray)):
            header.append(prefix + k)
            row.append(v)
    return header, row


# ---- config parsing ---------------------------------------------------------


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(path, f"cannot read config: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(path, f"invalid JSON: {exc}") from exc
    return cfg


def validate_config(cfg, command, path="<config>"):
    if command not in PARAMS:
        raise ConfigInvalid(path, f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    try:
        jsonschema.validate(cfg, CONFIG)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(path, _schema_message(exc)) from exc
    if cfg.get("command", command) != command:
        raise ConfigInvalid(path, f"config is for {cfg['command']!r}, not {command!r}")
    try:
        jsonschema.validate(cfg["params"], PARAMS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(path, "params: " + _schema_message(exc)) from exc


def _schema_message(exc):
    where = "/".join(str(p) for p in exc.absolute_path)
    return f"{where or '<root>'}: {exc.message}"


def _chain(spec):
    if "ar1" in spec:
        return rouwenhorst(AR1Spec.from_dict(spec["ar1"]))
    return FiniteMarkovChain.from_dict(spec)


def _beta(value, chain):
    if isinstance(value, str):
        return np.asarray(chain.states, dtype=float)
    return np.broadcast_to(np.asarray(value, dtype=float), (chain.n,)).copy()


def _utility(spec):
    return utility_from_dict(spec or {"kind": "log"})


def _production(spec):
    return cobb_douglas((spec or {"alpha": 0.36})["alpha"])


def _solve(dp, method, opts, v0=None, eval_kw=None):
    if method == "howard":
        return howard(dp, tol=opts["tol"], max_iter=opts["max_iter"], eval_kw=eval_kw)
    return vfi(dp, v0=v0, tol=opts["tol"], max_iter=opts["max_iter"])


def _solution_result(dp, sol, extra=None):
    data = sol.to_dict()
    data.update(extra or {})
    rows = sol.to_rows(dp)
    return Result(data, ["i_x", "i_z", "x", "z", "value", "action"], rows)


# ---- commands ---------------------------------------------------------------


def cmd_spectral(p, opts):
    chain = _chain(p["chain"])
    beta = _beta(p.get("beta", "states"), chain)
    w = p.get("weights", {"kind": "beta"})
    kind = w["kind"]
    if kind == "ez":
        beta = disc.ez_weights(beta, w["theta"])
    elif kind == "growth":
        beta = disc.growth_weights(beta, np.asarray(w["alpha"], dtype=float), w["theta"])
    elif kind == "return":
        beta = disc.return_weights(beta, np.asarray(w["R"], dtype=float), w["gamma"])
    op = disc.build_discount_operator(chain, beta)
    rep = disc.spectral_radius(op, tol=opts["spectral_tol"], n_max=p.get("n_max", disc.DEFAULT_N_MAX))
    logger.info("spectral certificate: r in [%r, %r], contraction index %s", rep.lower, rep.upper, rep.contraction_index)
    data = rep.to_dict()
    data["weights"] = np.asarray(op.weights).tolist()
    return Result(data)


def cmd_rouwenhorst(p, opts):
    chain = rouwenhorst(AR1Spec.from_dict(p))
    stat = stationary_distribution(chain)
    data = chain.to_dict()
    data["stationary"] = stat.pi.tolist()
    rows = [[i, s, q] for i, (s, q) in enumerate(zip(chain.states, stat.pi))]
    return Result(data, ["i", "state", "stationary"], rows)


def cmd_figure_r(p, opts):
    grid = disc.radius_grid(
        p.get("mu", 0.985),
        make_grid(p.get("rho_grid", BENCHMARK_RHO)),
        make_grid(p.get("sigma_grid", BENCHMARK_SIGMA)),
        p.get("n_states", 50),
        tol=opts["spectral_tol"],
        n_max=p.get("n_max", disc.DEFAULT_N_MAX),
        threads=opts["threads"],
    )
    rows = [
        [float(r), float(s), float(grid.radius[i, j])]
        for i, r in enumerate(grid.rho)
        for j, s in enumerate(grid.sigma_beta)
    ]
    data = {
        "rho": grid.rho.tolist(),
        "sigma_beta": grid.sigma_beta.tolist(),
        "radius": grid.radius.tolist(),
        "certificates": [rep.to_dict() for rep in grid.reports],
    }
    return Result(data, ["rho", "sigma_beta", "radius"], rows)


def cmd_solve_growth(p, opts):
    chain = _chain(p["chain"])
    params = GrowthParams(make_grid(p["k_grid"]), chain, _beta(p["beta"], chain),
                          _production(p.get("production")), _utility(p.get("utility")))
    dp = build_growth(params, spectral_tol=opts["spectral_tol"])
    return _solution_result(dp, _solve(dp, p.get("method", "howard"), opts))


def cmd_solve_search(p, opts):
    chain = _chain(p["chain"])
    params = SearchParams(np.asarray(p["wages"], dtype=float), float(p["c"]), chain, _beta(p["beta"], chain))
    dp = build_search(params, spectral_tol=opts["spectral_tol"])
    sol = _solve(dp, p.get("method", "howard"), opts)
    accept = sol.policy[0] == ACCEPT
    res = _solution_result(dp, sol, {"K": dp.meta["K"].tolist(), "accept": accept.tolist()})
    res.header = ["i_z", "z", "value", "K", "accept"]
    res.rows = [
        [i, float(chain.states[i]), float(sol.value[0, i]), float(dp.meta["K"][i]), int(accept[i])] for i in range(chain.n)
    ]
    return res


def cmd_solve_tax(p, opts):
    chain = _chain(p["chain"])
    params = TaxParams(make_grid(p["b_grid"]), chain, _beta(p["beta"], chain),
                       p["R"], p["P"], p["T"], _utility(p.get("utility")))
    dp = build_tax(params, spectral_tol=opts["spectral_tol"])
    return _solution_result(dp, _solve(dp, p.get("method", "howard"), opts))


def cmd_solve_ez(p, opts):
    chain = _chain(p["chain"])
    kw = {"eps": p["eps"]} if "eps" in p else {}
    params = EZParams(make_grid(p["x_grid"]), chain, _beta(p["beta"], chain), p["d"], p["p"],
                      p["rho_pref"], p["gamma"], **kw)
    dp = build_ez(params, spectral_tol=opts["spectral_tol"])
    v0 = ez_initial_value(params, dp)
    sol = _solve(dp, p.get("method", "vfi"), opts, v0=v0, eval_kw={"v0": v0, "tol": opts["tol"] * 1e-2})
    value = sol.value ** (1.0 / (1.0 - params.gamma))
    res = _solution_result(dp, sol, {"transformed_value": sol.value.tolist(), "value": value.tolist()})
    res.header = ["i_x", "i_z", "x", "z", "transformed_value", "value", "action"]
    res.rows = [r[:4] + (r[4], float(value[r[0], r[1]]), r[5]) for r in res.rows]
    return res


def cmd_solve_homogeneous(p, opts):
    chain = _chain(p["chain"])
    params = HomogeneousParams(p["gamma"], np.asarray(p["R"], dtype=float), _beta(p["beta"], chain), chain,
                               make_grid(p["s_grid"]))
    dp = build_homogeneous_profile(params, spectral_tol=opts["spectral_tol"])
    sol = _solve(dp, p.get("method", "howard"), opts)
    w, s = sol.value[0], dp.a_grid[sol.policy[0]]
    res = _solution_result(dp, sol, {"w": w.tolist(), "savings_rate": s.tolist()})
    res.header = ["i_z", "z", "w", "savings_rate"]
    res.rows = [[i, float(chain.states[i]), float(w[i]), float(s[i])] for i in range(chain.n)]
    return res


def cmd_solve_truncated(p, opts):
    chain = _chain(p["chain"])
    params = GrowthParams(None, chain, _beta(p["beta"], chain), _production(p.get("production")),
                          _utility(p.get("utility")))
    lad = p["ladder"]
    ladder = TruncationLadder(lad["bounds"]) if "bounds" in lad else TruncationLadder.geometric(lad["M"], lad.get("levels", 6))
    sol, report = solve_truncated(params, ladder, p["step"], tol=opts["tol"], method=p.get("method", "howard"))
    dp = build_growth(GrowthParams(report.grids[-1], chain, params.beta, params.production, params.utility),
                      spectral_tol=opts["spectral_tol"])
    return _solution_result(dp, sol, {"ladder": report.to_dict()})


def cmd_oracle_check(p, opts):
    gen = {k: p[k] for k in ("max_states", "max_actions", "max_shocks") if k in p}
    report = oracle_check(
        instances=p.get("instances", 100),
        seed=opts["seed"] if opts["seed_from_cli"] else p.get("seed", opts["seed"]),
        negative_controls=p.get("negative_controls", 1),
        tol=opts["tol"],
        budget=p.get("budget", 10**6),
        threads=opts["threads"],
        **gen,
    )
    data = report.to_dict()
    res = Result(data)
    if report.results:
        res.header = list(report.results[0])
        res.rows = [[(json.dumps(v) if isinstance(v, list) else v) for v in r.values()] for r in report.results]
    return res


HANDLERS = {
    "spectral": cmd_spectral,
    "rouwenhorst": cmd_rouwenhorst,
    "figure-r": cmd_figure_r,
    "solve-growth": cmd_solve_growth,
    "solve-search": cmd_solve_search,
    "solve-tax": cmd_solve_tax,
    "solve-ez": cmd_solve_ez,
    "solve-homogeneous": cmd_solve_homogeneous,
    "solve-truncated": cmd_solve_truncated,
    "oracle-check": cmd_oracle_check,
}


# ---- output -----------------------------------------------------------------


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sdd-dp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(command, cfg, *, out=None, fmt=None, tol=None, seed=None, threads=1, path="<config>"):
    """Validate ``cfg`` for ``command``, compute, and return the rendered text.

    Writes to ``out`` (or the config's ``output.path``) when given.
    """
    validate_config(cfg, command, path)
    opts = {k: cfg.get(k, v) for k, v in DEFAULTS.items()}
    if tol is not None:
        opts["tol"] = tol
    opts["seed_from_cli"] = seed is not None
    if seed is not None:
        opts["seed"] = seed
    opts["threads"] = max(1, int(threads))
    output = cfg.get("output", {})
    fmt = fmt or output.get("format", "json")
    out = out or output.get("path")
    with threadpool_limits(limits=1):
        result = HANDLERS[command](cfg["params"], opts)
    text = result.render(fmt)
    if out:
        write_atomic(out, text)
    return text


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ConfigInvalid):
        payload.update(path=exc.path, reason=exc.reason)
    if isinstance(exc, RadiusNotCertified):
        payload["certificate"] = exc.report.to_dict()
    sys.stderr.write(json.dumps(_clean(payload), sort_keys=True) + "\n")
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="sdd-dp", description="Dynamic programs with state-dependent discounting.")
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=["json", "csv"], help="output format (default json)")
    ap.add_argument("--tol", type=float, help="solver tolerance (default 1e-8)")
    ap.add_argument("--seed", type=int, help="seed for randomized commands")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for grid and oracle commands")
    ap.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command not in HANDLERS:
            raise ConfigInvalid(args.config, f"unknown command {args.command!r}")
        cfg = load_config(args.config)
        text = run(args.command, cfg, out=args.out, fmt=args.format, tol=args.tol, seed=args.seed,
                   threads=args.threads, path=args.config)
    except ConfigInvalid as exc:
        return _error(exc, 2)
    except (InvalidChainError, LengthMismatch) as exc:
        # malformed chain or state-function lengths are config errors
        return _error(ConfigInvalid(args.config, str(exc)), 2)
    except (SDDError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error(exc, 1)
    if not (args.out or (isinstance(cfg, dict) and cfg.get("output", {}).get("path"))):
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
