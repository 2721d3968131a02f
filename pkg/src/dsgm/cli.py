"""``dsgm <solve|eval|gradcheck|synth> --config FILE [--key value ...]``

Configuration is a flat ``key = value`` file; any key can be overridden on
the command line as ``--key value`` or ``--key=value``.  Relative paths in a
config file are resolved against the file's directory.

Exit codes: 0 success, 1 numerical or tolerance failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import objective
from . import io as dio
from .divergences import DivergenceSpec
from .entropy import make_family, param_names, parse_family
from .errors import DomainError, DsgmError, EvalError, LineSearchFailed, PreconditionerDegenerate
from .gradcheck import DEFAULT_TOL, gradcheck, random_pair
from .operators import Convolution1D, DenseMatrix, InverseProblem
from .solver import TRACE_COLUMNS, SolverConfig, Status, solve
from .synth import generate

log = logging.getLogger("dsgm")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMMANDS = ("solve", "eval", "gradcheck", "synth")
PATH_KEYS = {"p", "q", "x0", "operator", "kernel", "out_dir"}
_PARAM_KEYS = {"k": "K", "kappa": "K", "gamma": "g"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _parse_overrides(extra: list[str]) -> dict[str, str]:
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"option --{key} needs a value") from None
        out[dio.normalize_key(key)] = val
    return out


def load_config(path: str | None, overrides: dict[str, str]) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"config file {path!r} not found")
        cfg = dio.read_config(p)
        for k in PATH_KEYS & cfg.keys():
            cfg[k] = str(p.parent / cfg[k])
    cfg.update(overrides)
    return cfg


def _get(cfg, key, conv=str, default=None, required=False):
    if key not in cfg:
        if required:
            raise UsageError(f"missing required key {key!r}")
        return default
    try:
        return conv(cfg[key])
    except ValueError:
        raise UsageError(f"key {key!r}: cannot parse {cfg[key]!r}") from None


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _enum_text(s: str) -> str:
    return s.strip().lower().replace("-", "_")


def build_spec(cfg) -> DivergenceSpec:
    text = _get(cfg, "family", required=True)
    if len(text.split()) > 1:
        family = parse_family(text)
    else:
        tag = text.strip().lower()
        names = param_names(tag)
        params = {}
        for k, v in cfg.items():
            name = _PARAM_KEYS.get(k, k)
            if name in names:
                params[name] = _get(cfg, k, float)
        family = make_family(tag, **params)
    form = _enum_text(_get(cfg, "form", default="csiszar"))
    form = {"dual_csiszar": "csiszar_dual", "dual_bregman": "bregman_dual"}.get(form, form)
    try:
        return DivergenceSpec(
            family,
            form,
            _enum_text(_get(cfg, "variant", default="plain")),
            _enum_text(_get(cfg, "factor", default="reference")),
        )
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def _vector(cfg, key):
    path = _get(cfg, key, required=True)
    if not Path(path).is_file():
        raise UsageError(f"{key} file {path!r} not found")
    return dio.read_vector(path)


# ---------------------------------------------------------------------------
# commands


def cmd_eval(cfg) -> int:
    spec = build_spec(cfg)
    p, q = _vector(cfg, "p"), _vector(cfg, "q")
    try:
        value = objective.value(spec, p, q)
        g = objective.neg_grad(spec, p, q)
    except EvalError as exc:
        raise DomainError(str(exc)) from None
    print(f"spec={spec}")
    print(f"value={value!r}")
    print("neg_grad=" + ",".join(repr(float(v)) for v in g))
    return EXIT_OK


def cmd_gradcheck(cfg) -> int:
    spec = build_spec(cfg)
    tol = _get(cfg, "tol", float, DEFAULT_TOL)
    if "p" in cfg or "q" in cfg:
        p, q = _vector(cfg, "p"), _vector(cfg, "q")
    else:
        seed = _get(cfg, "seed", int, 0)
        if seed < 0:
            raise UsageError("seed must be non-negative")
        p, q = random_pair(seed, _get(cfg, "n", int, 6))
    try:
        res = gradcheck(spec, p, q, tol)
    except EvalError as exc:
        raise DomainError(str(exc)) from None
    print(f"spec={spec}")
    print(f"max_rel_err={res.max_rel_err:.3e} tol={tol:g}")
    print(f"status={'pass' if res.passed else 'fail'}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_synth(cfg) -> int:
    out = Path(_get(cfg, "out_dir", default="."))
    prob = generate(
        n=_get(cfg, "n", int, 32),
        seed=_get(cfg, "seed", int, 1),
        width=_get(cfg, "width", int, 5),
        sigma=_get(cfg, "sigma", float, 0.7),
        noise=_get(cfg, "noise", _bool, False),
        photons=_get(cfg, "photons", float, 1000.0),
    )
    out.mkdir(parents=True, exist_ok=True)
    dio.write_vector(out / "x_true.csv", prob.x_true, "x_true")
    dio.write_vector(out / "kernel.csv", prob.kernel, "kernel")
    dio.write_vector(out / "p.csv", prob.p, "p")
    dio.write_vector(out / "x0.csv", prob.x0, "x0")
    dio.write_config(
        out / "problem.cfg",
        {
            "kernel": "kernel.csv",
            "boundary": "periodic",
            "n": prob.x_true.size,
            "p": "p.csv",
            "x0": "x0.csv",
            "seed": prob.seed,
        },
    )
    print(f"wrote synthetic problem n={prob.x_true.size} seed={prob.seed} to {out}")
    return EXIT_OK


def _operator(cfg, m):
    if "operator" in cfg:
        path = _get(cfg, "operator")
        if not Path(path).is_file():
            raise UsageError(f"operator file {path!r} not found")
        return DenseMatrix(dio.read_matrix(path))
    if "kernel" in cfg:
        kernel = _vector(cfg, "kernel")
        n = _get(cfg, "n", int, m)
        return Convolution1D(kernel, n, _get(cfg, "boundary", default="periodic"))
    raise UsageError("solve needs an 'operator' or a 'kernel' key")


def cmd_solve(cfg) -> int:
    spec = build_spec(cfg)
    p = _vector(cfg, "p")
    op = _operator(cfg, p.size)
    C = _get(cfg, "sum_constraint", float)
    problem = InverseProblem(op, p)
    if "x0" in cfg:
        x0 = _vector(cfg, "x0")
    else:
        total = C if C is not None else float(np.sum(p))
        x0 = np.full(problem.n, total / problem.n)
    fields = {
        "mode": _enum_text,
        "max_iters": int,
        "grad_tol": float,
        "value_tol": float,
        "armijo_c": float,
        "backtrack_ratio": float,
        "step_safety": float,
        "alpha_cap": float,
    }
    kw = {k: _get(cfg, k, conv) for k, conv in fields.items() if k in cfg}
    config = SolverConfig(spec, sum_constraint=C, **kw)
    try:
        x, trace = solve(config, problem, x0)
    except (EvalError, LineSearchFailed, PreconditionerDegenerate) as exc:
        print(f"status=error {type(exc).__name__}: {exc}")
        return EXIT_FAIL
    out = Path(_get(cfg, "out_dir", default="."))
    out.mkdir(parents=True, exist_ok=True)
    dio.write_vector(out / "x_final.csv", x, "x_final")
    dio.write_matrix(out / "trace.csv", trace.records, header=TRACE_COLUMNS)
    last = trace.records[-1]
    print(f"spec={spec} mode={config.mode.value}")
    print(f"status={trace.status.value} iters={last.iter} value={last.value!r} gradnorm={last.gradnorm:.3e}")
    return EXIT_FAIL if trace.status is Status.DEGENERATE else EXIT_OK


_COMMANDS = {"solve": cmd_solve, "eval": cmd_eval, "gradcheck": cmd_gradcheck, "synth": cmd_synth}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dsgm",
        description="Generalized divergences and scaled-gradient reconstruction.",
        epilog="Any config key may be given as --key value.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="FILE", help="flat key = value config file")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args, extra = ap.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config, _parse_overrides(extra))
        return _COMMANDS[args.command](cfg)
    except (UsageError, DsgmError, OSError, ValueError) as exc:
        print(f"dsgm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
