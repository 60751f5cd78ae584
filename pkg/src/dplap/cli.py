"""Batch command-line front end.

Subcommands: solve, eigen, check, sweep, selftest.  Problem configs are JSON
files (one problem per file); results are line-oriented text with `# key =
value` headers and `k u(k)` rows; sweeps are CSV.  Numbers are printed with
17 significant digits so files round-trip doubles losslessly.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import core
from .core import GridFunction, Nonlinearity, ProblemSpec
from .energy import energy, gradient
from .existence import (alpha_threshold, check_thm_esistenza,
                        check_three_solutions_window, find_admissible_eps)
from .nonlinearities import (bounded_rational, constant, from_table, linear,
                             power, scaled_per_node, zero)
from .solver import (POSITIVE, SolverOptions, multistart_solve, sweep_alpha)
from .spectrum import (EigenConvergenceError, eigenvalues_p2, first_eigenpair,
                       matrix_A)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_RESULT = 2
EXIT_SELFTEST_FAIL = 3

RESULT_HEADER_KEYS = ("T", "p", "alpha", "seed", "residual", "energy")


class ConfigError(ValueError):
    """Invalid config; carries the offending field name."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return f"{float(x):.17g}"


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("file", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("file", f"not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("file", "top level must be an object")
    return cfg


def _require_number(cfg: dict, field: str):
    if field not in cfg:
        raise ConfigError(field, "missing")
    val = cfg[field]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(field, "must be a number")
    return val


def build_nonlinearity(nl_cfg, T: int) -> Nonlinearity:
    if not isinstance(nl_cfg, dict):
        raise ConfigError("nonlinearity", "must be an object with a 'kind'")
    kind = nl_cfg.get("kind")
    params = nl_cfg.get("params", [])
    if not isinstance(params, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in params):
        raise ConfigError("nonlinearity.params", "must be a list of numbers")
    if kind == "zero":
        nl = zero()
    elif kind == "constant":
        nl = constant(*params[:1])
    elif kind == "linear":
        nl = linear(*params[:1])
    elif kind == "power":
        if not params:
            raise ConfigError("nonlinearity.params", "power needs [exponent] or [exponent, coeff]")
        try:
            nl = power(*params[:2])
        except ValueError as exc:
            raise ConfigError("nonlinearity.params", str(exc)) from exc
    elif kind == "bounded_rational":
        nl = bounded_rational()
    elif kind == "custom_table":
        if "t" not in nl_cfg or "f" not in nl_cfg:
            raise ConfigError("nonlinearity", "custom_table needs 't' and 'f' sample arrays")
        try:
            nl = from_table(nl_cfg["t"], nl_cfg["f"],
                            is_nonnegative=bool(nl_cfg.get("is_nonnegative", False)))
        except ValueError as exc:
            raise ConfigError("nonlinearity", str(exc)) from exc
    else:
        raise ConfigError("nonlinearity.kind",
                          f"unknown kind {kind!r}; expected one of zero, constant, "
                          "linear, power, bounded_rational, custom_table")
    scale = nl_cfg.get("per_k_scale")
    if scale is not None:
        if not isinstance(scale, list) or len(scale) != T:
            raise ConfigError("nonlinearity.per_k_scale", f"must be a list of length T={T}")
        nl = scaled_per_node(nl, scale)
    return nl


def build_problem(cfg: dict):
    """Validate a config dict; return (ProblemSpec, alpha field, gamma field)."""
    T = _require_number(cfg, "T")
    if int(T) != T or T < 2:
        raise ConfigError("T", "must be an integer >= 2")
    T = int(T)
    p = float(_require_number(cfg, "p"))
    if not p > 1.0:
        raise ConfigError("p", "p must exceed 1")
    if "nonlinearity" not in cfg:
        raise ConfigError("nonlinearity", "missing")
    nl = build_nonlinearity(cfg["nonlinearity"], T)
    gamma = cfg.get("gamma")
    if gamma is not None:
        if isinstance(gamma, (int, float)) and not isinstance(gamma, bool):
            gamma = [float(gamma)] * T
        elif isinstance(gamma, list) and len(gamma) == T and all(
                not isinstance(g, bool) and isinstance(g, (int, float)) for g in gamma):
            gamma = [float(g) for g in gamma]
        else:
            raise ConfigError("gamma", f"must be a number or a list of length T={T}")
    alpha = cfg.get("alpha")
    try:
        prob = ProblemSpec(T=T, p=p, nonlinearity=nl)
    except ValueError as exc:
        raise ConfigError("nonlinearity", str(exc)) from exc
    return prob, alpha, gamma


def expand_alphas(alpha_field) -> list[float]:
    """Turn the config alpha field (sweep object or explicit list) into a list."""
    if isinstance(alpha_field, dict):
        for key in ("lo", "hi", "n"):
            if key not in alpha_field:
                raise ConfigError("alpha", f"sweep object needs '{key}'")
        lo, hi, n = alpha_field["lo"], alpha_field["hi"], alpha_field["n"]
        if not (isinstance(n, int) and not isinstance(n, bool) and n >= 1):
            raise ConfigError("alpha.n", "must be a positive integer")
        if not (0 < lo < hi):
            raise ConfigError("alpha", "sweep needs 0 < lo < hi")
        return [float(a) for a in np.geomspace(lo, hi, n)]
    if isinstance(alpha_field, list):
        if not alpha_field or any(isinstance(a, bool) or not isinstance(a, (int, float))
                                  for a in alpha_field):
            raise ConfigError("alpha", "list must be nonempty numbers")
        return [float(a) for a in alpha_field]
    raise ConfigError("alpha", "sweep requires alpha as {lo, hi, n} or a list")


def scalar_alpha(alpha_field, flag_value):
    if flag_value is not None:
        return float(flag_value)
    if alpha_field is None:
        raise ConfigError("alpha", "missing; pass --alpha or set it in the config")
    if isinstance(alpha_field, (int, float)) and not isinstance(alpha_field, bool):
        return float(alpha_field)
    raise ConfigError("alpha", "config declares a sweep; pass --alpha or use the sweep command")


def write_result(path: str, prob: ProblemSpec, alpha: float, seed: int,
                 residual: float, energy_value: float, u: GridFunction) -> None:
    lines = []
    values = (prob.T, prob.p, alpha, seed, residual, energy_value)
    for key, val in zip(RESULT_HEADER_KEYS, values):
        lines.append(f"# {key} = {_fmt(val)}")
    for k, v in enumerate(u.values):
        lines.append(f"{k} {_fmt(v)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_result(path: str):
    """Parse a result file back into (headers dict, GridFunction)."""
    headers: dict[str, float] = {}
    nodes: list[tuple[int, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line.lstrip("# ").partition(" = ")
                headers[key.strip()] = float(val)
            else:
                k_str, v_str = line.split()
                nodes.append((int(k_str), float(v_str)))
    nodes.sort(key=lambda kv: kv[0])
    if [k for k, _ in nodes] != list(range(len(nodes))):
        raise ValueError(f"{path}: node indices are not contiguous from 0")
    return headers, GridFunction(np.array([v for _, v in nodes]))


def _pick_reported(sols):
    """Lowest energy wins; a positive solution breaks exact-energy ties."""
    best = sols[0]
    cutoff = best.energy + 1e-12 * (1.0 + abs(best.energy))
    for s in sols:
        if s.energy <= cutoff and s.positivity == POSITIVE:
            return s
    return best


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    prob, alpha_field, _ = build_problem(cfg)
    alpha = scalar_alpha(alpha_field, args.alpha)
    opts = SolverOptions(tol=args.tol, seed=args.seed)
    sols = multistart_solve(prob, alpha, n_starts=args.starts, opts=opts)
    if not sols:
        print("no converged solution")
        return EXIT_NO_RESULT
    best = _pick_reported(sols)
    write_result(args.out, prob, alpha, opts.seed, best.residual, best.energy, best.u)
    print(f"wrote {args.out}: {len(sols)} distinct solution(s); best energy "
          f"{_fmt(best.energy)}, residual {_fmt(best.residual)}, "
          f"positivity {best.positivity}")
    return EXIT_OK


def cmd_eigen(args) -> int:
    if not args.p > 1.0:
        print("error: p must exceed 1", file=sys.stderr)
        return EXIT_ERROR
    if args.T < 2:
        print("error: T must be an integer >= 2", file=sys.stderr)
        return EXIT_ERROR
    opts = SolverOptions(tol=args.tol)
    try:
        pair = first_eigenpair(args.p, args.T, opts)
    except EigenConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"# lambda_1 = {_fmt(pair.lambda_)}")
    print(f"# residual = {_fmt(pair.residual)}")
    for k, v in enumerate(pair.phi.values):
        print(f"{k} {_fmt(v)}")
    if args.p == 2.0:
        closed = eigenvalues_p2(args.T)
        numeric = np.sort(np.linalg.eigvalsh(matrix_A(args.T)))
        deviation = float(np.max(np.abs(numeric - closed) / closed))
        print("# lambda_k closed form: " + " ".join(_fmt(x) for x in closed))
        print(f"# max relative deviation from closed form = {deviation:.3e}")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    prob, _, gamma = build_problem(cfg)
    verdicts: list[bool] = []
    if args.eps is not None:
        cert = check_thm_esistenza(prob, args.eps)
        _print_certificate(cert)
        verdicts.append(cert.verdict)
    if args.eps_scan:
        cert = find_admissible_eps(prob, (args.eps_lo, args.eps_hi), args.eps_n)
        if cert is None:
            print(f"no admissible eps in [{_fmt(args.eps_lo)}, {_fmt(args.eps_hi)}]")
            verdicts.append(False)
        else:
            _print_certificate(cert)
            verdicts.append(True)
    if args.cd is not None:
        c, d = args.cd
        if not 0 < c < d:
            print("error: --cd requires 0 < c < d", file=sys.stderr)
            return EXIT_ERROR
        win = check_three_solutions_window(prob, c, d)
        print(f"# c = {_fmt(win.c)}")
        print(f"# d = {_fmt(win.d)}")
        print(f"# alpha_lo = {_fmt(win.alpha_lo)}")
        print(f"# alpha_hi = {_fmt(win.alpha_hi)}")
        print(f"# verdict = {_fmt(win.verdict)}")
        verdicts.append(win.verdict)
    if gamma is not None or prob.nonlinearity.gamma is not None:
        try:
            thr = alpha_threshold(prob, gamma)
            print(f"# alpha_threshold = {_fmt(thr)}")
            print(f"# alpha in ({_fmt(thr)}, inf) guarantees a positive solution")
        except ValueError as exc:
            print(f"# alpha_threshold unavailable: {exc}")
    if verdicts and not all(verdicts):
        return EXIT_NO_RESULT
    return EXIT_OK


def _print_certificate(cert) -> None:
    print(f"# eps = {_fmt(cert.eps)}")
    print(f"# chi_eps = {_fmt(cert.chi_eps)}")
    print(f"# bound = {_fmt(cert.bound)}")
    print(f"# margin = {_fmt(cert.margin)}")
    print(f"# sigma = {_fmt(cert.sigma)}")
    print(f"# verdict = {_fmt(cert.verdict)}")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    prob, alpha_field, _ = build_problem(cfg)
    alphas = expand_alphas(alpha_field)
    opts = SolverOptions(tol=args.tol, seed=args.seed)
    rows = sweep_alpha(prob, alphas, opts, n_starts=args.starts)
    lines = ["alpha,n_solutions,min_energy,sup_norm,positivity,nontriviality_zeta"]
    for r in rows:
        if r.error:
            print(f"warning: alpha {_fmt(r.alpha)}: {r.error}", file=sys.stderr)
        cells = [_fmt(r.alpha), str(r.n_solutions),
                 _fmt(r.min_energy) if r.min_energy is not None else "",
                 _fmt(r.sup_norm) if r.sup_norm is not None else "",
                 r.positivity if r.positivity is not None else "",
                 _fmt(r.nontriviality_zeta) if r.nontriviality_zeta is not None else ""]
        lines.append(",".join(cells))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK if any(r.n_solutions > 0 for r in rows) else EXIT_NO_RESULT


def _selftest_constant_identity():
    worst = 0.0
    for p in (1.1, 1.5, 2.0, 3.0, 5.0, 10.0):
        for T in range(2, 101):
            lhs = core.c_const(p, T)
            rhs = core.kappa(p, T) ** p / p
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 1e-14, f"max relative deviation {worst:.3e} (tol 1e-14)"


def _selftest_remark_inequality():
    # raw even/odd formulas on purpose: independent of the kappa helper
    worst = math.inf
    for p in (1.1, 1.5, 2.0, 3.0, 5.0, 10.0):
        for T in range(2, 101):
            lhs = ((2.0 / T) ** (p - 1.0) + (2.0 / (T + 2.0)) ** (p - 1.0)) ** (-1.0 / p)
            rhs = (T + 1.0) ** ((p - 1.0) / p) / 2.0
            worst = min(worst, rhs - lhs)
    return worst > 0.0, f"min margin {worst:.3e} (must be positive)"


def _selftest_p2_spectrum():
    worst = 0.0
    for T in range(2, 61):
        closed = eigenvalues_p2(T)
        numeric = np.sort(np.linalg.eigvalsh(matrix_A(T)))
        worst = max(worst, float(np.max(np.abs(numeric - closed) / closed)))
    return worst <= 1e-10, f"max relative deviation {worst:.3e} (tol 1e-10)"


def _selftest_gradient_fd():
    rng = np.random.Generator(np.random.Philox(1234))
    nl = bounded_rational()
    alpha = 0.7
    worst = 0.0
    for p in (1.5, 2.0, 3.0, 4.0):
        for T in (2, 5, 10):
            prob = ProblemSpec(T=T, p=p, nonlinearity=nl)
            for _ in range(5):
                u = rng.uniform(-2.0, 2.0, T)
                if p < 2.0:
                    while np.min(np.abs(np.diff(np.concatenate(([0.0], u, [0.0]))))) <= 1e-3:
                        u = rng.uniform(-2.0, 2.0, T)
                gf = GridFunction.from_interior(u)
                g = gradient(gf, prob, alpha)
                step = 1e-6 * (1.0 + float(np.max(np.abs(u))))
                fd = np.empty(T)
                for i in range(T):
                    up, dn = u.copy(), u.copy()
                    up[i] += step
                    dn[i] -= step
                    fd[i] = (energy(GridFunction.from_interior(up), prob, alpha)
                             - energy(GridFunction.from_interior(dn), prob, alpha)) / (2 * step)
                err = float(np.max(np.abs(g - fd)) / (1.0 + np.max(np.abs(g))))
                worst = max(worst, err)
    return worst <= 1e-6, f"max relative error {worst:.3e} (tol 1e-6)"


def cmd_selftest(args) -> int:
    checks = (
        ("constant-identity", _selftest_constant_identity),
        ("remark-inequality", _selftest_remark_inequality),
        ("p2-spectrum-closed-form", _selftest_p2_spectrum),
        ("gradient-vs-fd", _selftest_gradient_fd),
    )
    all_ok = True
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok = all_ok and ok
    return EXIT_OK if all_ok else EXIT_SELFTEST_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dplap",
        description="Discrete p-Laplacian two-point boundary value problems: "
                    "solve, eigenpairs, existence certificates, parameter sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="multistart solve at a single alpha")
    s.add_argument("config", help="JSON problem config")
    s.add_argument("--alpha", type=float, default=None, help="overrides the config alpha")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--starts", type=int, default=8, help="number of random starts")
    s.add_argument("--out", default="result.txt")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eigen", help="first eigenpair; full p=2 spectrum")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--T", type=int, required=True)
    e.add_argument("--tol", type=float, default=1e-9)
    e.set_defaults(func=cmd_eigen)

    c = sub.add_parser("check", help="existence and multiplicity certificates")
    c.add_argument("config")
    c.add_argument("--eps", type=float, default=None, help="test one eps")
    c.add_argument("--eps-scan", action="store_true", help="scan for an admissible eps")
    c.add_argument("--eps-lo", type=float, default=1e-3)
    c.add_argument("--eps-hi", type=float, default=1e3)
    c.add_argument("--eps-n", type=int, default=200)
    c.add_argument("--cd", nargs=2, type=float, metavar=("C", "D"),
                   help="evaluate the three-solutions window at (c, d)")
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("sweep", help="alpha sweep to CSV")
    w.add_argument("config", help="config whose alpha is {lo, hi, n} or a list")
    w.add_argument("--tol", type=float, default=1e-10)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--starts", type=int, default=8)
    w.add_argument("--out", default="sweep.csv")
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser("selftest", help="run the embedded numeric identity checks")
    t.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
