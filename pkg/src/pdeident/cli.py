"""Command-line front end.

Each subcommand reads a YAML config, computes everything in memory and only
then writes its artifacts, so a failure never leaves partial output. Exit
codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import classify as cl
from . import elliptic as el
from . import infer as inf
from . import solve as sv
from .config import ExperimentConfig, load_config
from .errors import ConfigError, IdentError, NumericalError, ValidationError
from .operators import BCKind, OperatorParams, eigenpairs

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(_cell(v) for v in r))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


# -- commands: each returns {filename: text} ---------------------------------------

def cmd_eigen(cfg: ExperimentConfig) -> dict[str, str]:
    A = cfg.operator_params()
    pairs = eigenpairs(A.d, A.b, cfg.boundary(), cfg.eigen.n_max)
    rows = [(p.n, p.lam, p.multiplicity, p.positive) for p in pairs]
    return {"eigen.csv": _csv(["n", "lambda", "multiplicity", "positive"], rows)}


def _pair(cfg: ExperimentConfig):
    c = cfg.classify
    if c.A1 is None or c.A2 is None:
        raise ConfigError("classify.A1 and classify.A2 are required")
    return OperatorParams(*c.A1), OperatorParams(*c.A2)


def _solution_field(sol, c) -> sv.Field:
    x = np.linspace(0.0, sol.bc.length, c.n_x)
    t = np.linspace(0.0, c.t_end, c.n_t)
    return sv.Field(x, t, sol(x[None, :], t[:, None]))


def cmd_classify(cfg: ExperimentConfig) -> dict[str, str]:
    A1, A2 = _pair(cfg)
    bc = cfg.boundary()
    c = cfg.classify
    res = cl.classify_pair(A1, A2, bc, c.n_max, c.nonnegative_only)
    out = {"classification.json": _json(res.to_dict())}
    if res.verdict is cl.Verdict.ANI:
        sol = cl.construct_nonidentifiable(A1, A2, bc, c.c0, c.n_max, c.nonnegative_only)
        out["solution.csv"] = sv.fields_to_csv([_solution_field(sol, c)])
    return out


def cmd_construct(cfg: ExperimentConfig) -> dict[str, str]:
    A1, A2 = _pair(cfg)
    bc = cfg.boundary()
    c = cfg.classify
    sol = cl.construct_nonidentifiable(A1, A2, bc, c.c0, c.n_max, c.nonnegative_only)
    B1, B2 = sol.params_pair
    summary = {
        "formula": sol.formula,
        "mode": sol.mode.n,
        "lambda": sol.mode.lam,
        "growth_rate": sol.growth_rate,
        "amplitude": sol.amplitude,
        "positive": sol.positive,
        "A1": dict(zip("dbc", B1.astuple())),
        "A2": dict(zip("dbc", B2.astuple())),
        "residual_A1": cl.pde_residual(sol, B1),
        "residual_A2": cl.pde_residual(sol, B2),
    }
    return {"construction.json": _json(summary),
            "solution.csv": sv.fields_to_csv([_solution_field(sol, c)])}


def cmd_aset(cfg: ExperimentConfig) -> dict[str, str]:
    a = cfg.aset
    samples = cl.indistinguishable_set(cfg.boundary(), a.n_max, a.d_grid.array(), a.b_grid.array())
    rows = [(s.n, s.d, s.b, s.c, s.positive) for s in samples]
    return {"aset.csv": _csv(["n", "d", "b", "c", "positive"], rows)}


def _reaction(nl):
    if nl.a is not None and nl.m_profile is not None:
        raise ConfigError("give either nonlinear.a or nonlinear.m_profile")
    if nl.b is None:
        raise ConfigError("nonlinear.b is required")
    if nl.m_profile is not None:
        mx = np.asarray(nl.m_profile.x, dtype=float)
        mm = np.asarray(nl.m_profile.m, dtype=float)
        if mx.size != mm.size or mx.size < 2 or np.any(np.diff(mx) <= 0):
            raise ConfigError("m_profile needs increasing x and matching m samples")
        return sv.HeteroLogistic(mm, nl.b, mx)
    if nl.a is None:
        raise ConfigError("nonlinear.a (or m_profile) is required")
    return sv.Logistic(nl.a, nl.b)


def cmd_elliptic(cfg: ExperimentConfig) -> dict[str, str]:
    nl = cfg.nonlinear
    bc = cfg.boundary()
    rng = tuple(nl.shoot_range) if nl.shoot_range else None
    if nl.P1 is not None or nl.P2 is not None:
        if nl.P1 is None or nl.P2 is None:
            raise ConfigError("nonlinear.P1 and nonlinear.P2 go together")
        res = el.classify_nonlinear_pair(nl.P1, nl.P2, bc, n_scan=nl.n_scan, shoot_range=rng)
        payload, cls = res.to_dict(), res.classification
    else:
        if nl.d is None:
            raise ConfigError("nonlinear.d is required")
        cls = el.shoot_count(nl.d, _reaction(nl), bc, rng, nl.n_scan, nl.nonnegative_only)
        payload = cls.to_dict()
    out = {"elliptic.json": _json(payload)}
    for k, p in enumerate(cls.solutions):
        out[f"profile_{k}.csv"] = el.profile_csv(p)
    return out


def cmd_simulate(cfg: ExperimentConfig) -> dict[str, str]:
    s = cfg.simulate
    bc = cfg.boundary()
    t = np.linspace(0.0, s.t_end, s.n_t)
    ic = sv.EigenExpansionIC(tuple(s.ic), bc)
    if s.model == "logistic":
        nl = cfg.nonlinear
        if nl.d is None:
            raise ConfigError("nonlinear.d is required for the logistic model")
        x = sv.fd_grid(bc, s.n_x)
        f = sv.solve_nonlinear_fd(nl.d, _reaction(nl), bc, ic(x), t, nx=s.n_x)
    elif s.method == "spectral":
        A = cfg.operator_params()
        f = sv.solve_linear_spectral(A, bc, ic, np.linspace(0.0, bc.length, s.n_x), t)
    else:
        A = cfg.operator_params()
        x = sv.fd_grid(bc, s.n_x)
        f = sv.solve_linear_fd(A, bc, ic(x), t, nx=s.n_x)
    return {"field.csv": sv.fields_to_csv([f])}


def cmd_profile(cfg: ExperimentConfig) -> dict[str, str]:
    i = cfg.infer
    bc = cfg.boundary()
    if bc.kind is not BCKind.DIRICHLET:
        raise ConfigError("profile runs on the Dirichlet problem")
    A = OperatorParams(i.d_true, 0.0, i.c_true)
    noise = inf.NoiseModel(i.sigma, i.eta)
    ic = inf.gaussian_ic_coefficients(i.omega, i.N, bc.length)
    x_obs = inf.default_x_obs() * bc.length
    data = inf.generate_dataset(A, ic, noise, x_obs=x_obs, seed=i.seed)
    surf = inf.profile_likelihood(data, i.c_grid.array(), i.d_grid.array(), noise, i.N,
                                  bc.length, profile_noise=i.profile_noise)
    return {"dataset.csv": data.to_csv(), "profile.csv": surf.to_csv(), "mle.json": surf.mle_json()}


COMMANDS = {
    "eigen": cmd_eigen,
    "classify": cmd_classify,
    "aset": cmd_aset,
    "construct": cmd_construct,
    "elliptic": cmd_elliptic,
    "simulate": cmd_simulate,
    "profile": cmd_profile,
}


# -- plumbing ---------------------------------------------------------------------------

def _write_all(outdir: Path, files: dict[str, str], force: bool) -> None:
    clashes = [n for n in files if (outdir / n).exists()]
    if clashes and not force:
        raise ConfigError(f"refusing to overwrite {', '.join(sorted(clashes))} (use --force)")
    outdir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=outdir, prefix=f".{name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, outdir / name))
        for tmp, dst in staged:
            os.replace(tmp, dst)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _error_line(exc: Exception, code: int) -> str:
    return json.dumps({"error": type(exc).__name__, "message": " ".join(str(exc).split()),
                       "exit_code": code})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdeident", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config (version: 1)")
    common.add_argument("--out", help="output directory (overrides output.path)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides infer.seed)")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.infer.seed = args.seed
        outdir = Path(args.out or cfg.output.path or ".")
        files = COMMANDS[args.command](cfg)
        _write_all(outdir, files, args.force)
    except ValidationError as exc:
        print(_error_line(exc, EXIT_INVALID), file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(_error_line(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    except IdentError as exc:  # pragma: no cover - every error belongs to a family
        print(_error_line(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    for name in sorted(files):
        print(outdir / name)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
