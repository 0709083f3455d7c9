"""Command-line interface: ``qfdiv {divergence,sweep,verify,regularize,contraction,dp-audit}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, dpriv, verify
from .contraction import OptimizerConfig, eta_f_sampled, eta_gamma, eta_x2_global, eta_x2_local
from .fdiv import d_f_integral, umegaki
from .functions import parse_function
from .hockey import d_max, e_gamma_unchecked, fidelity, hilbert_omega, support_flag, thompson, trace_distance
from .renyi import (
    d_alpha,
    geometric_renyi,
    h_alpha,
    measured_renyi_lower,
    petz_renyi,
    regularization_trace,
    sandwiched_renyi,
)
from .states import (
    QuantumChannel,
    depolarizing,
    identity_channel,
    maximally_mixed,
    random_channel,
    replacement_channel,
    validate_density,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- serialization

def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=complex)
    return {"dim": int(a.shape[0]),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a]}


def _entries_to_array(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ValueError("entries must be a non-empty list of rows")
    out = []
    for row in entries:
        if not isinstance(row, list):
            raise ValueError("each row must be a list of [re, im] pairs")
        parsed = []
        for z in row:
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)):
                raise ValueError(f"matrix entry {z!r} is not a [re, im] pair of numbers")
            if not all(math.isfinite(x) for x in z):
                raise ValueError(f"matrix entry {z!r} is not finite")
            parsed.append(complex(z[0], z[1]))
        out.append(parsed)
    if len({len(r) for r in out}) != 1:
        raise ValueError("ragged matrix rows")
    a = np.array(out, dtype=complex)
    if rows is not None and a.shape[0] != rows or cols is not None and a.shape[1] != cols:
        raise ValueError(f"expected a {rows}x{cols} matrix, got {a.shape[0]}x{a.shape[1]}")
    return a


def matrix_from_json(doc) -> np.ndarray:
    """Parse a ``{"dim", "entries"}`` document without altering any entry."""
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise ValueError('matrix document needs "dim" and "entries"')
    n = doc["dim"]
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dim must be a positive integer, got {n!r}")
    return _entries_to_array(doc["entries"], n, n)


def channel_to_json(ch: QuantumChannel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out,
            "kraus": [matrix_to_json(k)["entries"] for k in ch.kraus]}


def channel_from_json(doc) -> QuantumChannel:
    if not isinstance(doc, dict) or not {"dim_in", "dim_out", "kraus"} <= doc.keys():
        raise ValueError('channel document needs "dim_in", "dim_out" and "kraus"')
    ks = [_entries_to_array(k, doc["dim_out"], doc["dim_in"]) for k in doc["kraus"]]
    return QuantumChannel(tuple(ks))


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from exc


def load_state(path: str) -> np.ndarray:
    return validate_density(matrix_from_json(_read_json(path)))


def _parse_params(body: str) -> dict[str, str]:
    out = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {item!r}")
        out[key.strip()] = val.strip()
    return out


BUILTIN_CHANNELS = ("depolarizing", "identity", "replacement", "random")


def load_channel(arg: str) -> QuantumChannel:
    """A channel JSON file, or a builtin like ``depolarizing:p=0.25,dim=2``."""
    name, _, body = arg.partition(":")
    if name in BUILTIN_CHANNELS and not Path(arg).exists():
        kw = _parse_params(body)
        dim = int(kw.pop("dim", 2))
        if name == "depolarizing":
            ch = depolarizing(float(kw.pop("p")), maximally_mixed(dim))
        elif name == "identity":
            ch = identity_channel(dim)
        elif name == "replacement":
            ch = replacement_channel(maximally_mixed(dim), dim)
        else:
            if "seed" not in kw:
                raise ValueError("random channel needs an explicit seed=")
            ch = random_channel(dim, int(kw.pop("dim_out", dim)), int(kw.pop("env", 2)),
                                seed=int(kw.pop("seed")))
        if kw:
            raise ValueError(f"unused channel parameters {sorted(kw)}")
        return ch
    return channel_from_json(_read_json(arg))


def load_neighbors(path: str) -> dpriv.NeighborSet:
    doc = _read_json(path)
    pairs = doc.get("pairs") if isinstance(doc, dict) else None
    if not isinstance(pairs, list):
        raise ValueError('neighbour document needs a "pairs" list')
    out = []
    for pair in pairs:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError("each neighbour entry must be a two-element list of matrices")
        out.append(tuple(matrix_from_json(m) for m in pair))
    return dpriv.NeighborSet(tuple(out))


def _jsonable(x):
    """Replace non-finite floats by strings and arrays by nested lists."""
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return matrix_to_json(x) if x.ndim == 2 else _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def emit_json(doc, stream=None) -> None:
    json.dump(_jsonable(doc), stream or sys.stdout, indent=2, allow_nan=False)
    (stream or sys.stdout).write("\n")


def format_cell(x) -> str:
    """Shortest round-trip text; ``inf``/``-inf`` for infinities, empty for missing."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def emit_csv(header, rows, stream=None) -> None:
    w = csv.writer(stream or sys.stdout, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(x) if not isinstance(x, str) else x for x in row])


# ---------------------------------------------------------------- commands

METRICS = {
    "trace": trace_distance,
    "dmax": d_max,
    "thompson": thompson,
    "omega": hilbert_omega,
    "fidelity": fidelity,
}


def cmd_divergence(args) -> int:
    rho, sigma = load_state(args.rho), load_state(args.sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"rho is {rho.shape[0]}-dimensional but sigma is {sigma.shape[0]}")
    if args.f is not None:
        v = d_f_integral(parse_function(args.f), rho, sigma, args.tol)
        doc = {"value": v.value, "abs_error": v.abs_error, "support_flag": v.support_flag}
    elif args.renyi is not None:
        v = d_alpha(rho, sigma, args.renyi, args.tol)
        doc = {"value": v.value, "abs_error": v.abs_error, "support_flag": v.support_flag}
    else:
        doc = {"value": METRICS[args.metric](rho, sigma), "abs_error": 0.0,
               "support_flag": support_flag(rho, sigma)}
    if args.format == "csv":
        emit_csv(list(doc), [list(doc.values())])
    else:
        emit_json(doc)
    return EXIT_OK


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:steps, got {text!r}")
    start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("grid is empty")
    return np.linspace(start, stop, steps)


def _in(alpha: float, lo: float, hi: float, lo_open: bool = True) -> bool:
    return (alpha > lo if lo_open else alpha >= lo) and alpha <= hi


ALPHA_COLUMNS = {
    "H_alpha": lambda r, s, a: h_alpha(r, s, a).value,
    "D_alpha": lambda r, s, a: d_alpha(r, s, a).value,
    "petz": lambda r, s, a: petz_renyi(r, s, a) if _in(a, 0, 2) else None,
    "sandwiched": lambda r, s, a: sandwiched_renyi(r, s, a) if _in(a, 0.5, math.inf, False) else None,
    "geometric": lambda r, s, a: geometric_renyi(r, s, a) if _in(a, 0, 2) else None,
    "measured_lb": lambda r, s, a: measured_renyi_lower(r, s, a),
}


def _kl_report(name):
    idx = {"NewRevPin0": 0, "Thompson": 1, "Omega": 2, "NewRevPin1": 3}[name]
    return lambda r, s: bounds.reverse_pinsker_kl(r, s, include_chain=True)[idx].rhs


P_COLUMNS = {
    "D": lambda r, s: umegaki(r, s),
    "NewRevPin0": _kl_report("NewRevPin0"),
    "Thompson": _kl_report("Thompson"),
    "Omega": _kl_report("Omega"),
    "NewRevPin1": _kl_report("NewRevPin1"),
    # Eq1bound is an alias of the (1 + D_max - e^{-D_max}) E_1 column.
    "Eq1bound": _kl_report("NewRevPin1"),
    "Aud": lambda r, s: bounds.audenaert_bound(r, s).rhs,
    "Pinsker": lambda r, s: bounds.pinsker_lower(r, s).rhs,
}


def qubit_diagonal_family(p: float):
    return np.diag([p * p, 1 - p * p]).astype(complex), np.diag([0.1, 0.9]).astype(complex)


def qutrit_coherent_family(p: float):
    c = math.sqrt(p * (1 - p))
    rho = np.array([[4 * p, c, 0], [c, 4 * (1 - p), 0], [0, 0, 4]], dtype=complex) / 8
    return rho, np.diag([0.2, 0.6, 0.2]).astype(complex)


FAMILIES = {"qubit-diagonal": qubit_diagonal_family, "qutrit-coherent": qutrit_coherent_family}


def _columns(text: str | None, table: dict, default) -> list[str]:
    cols = default if text is None else [c.strip() for c in text.split(",") if c.strip()]
    bad = [c for c in cols if c not in table]
    if bad:
        raise ValueError(f"unknown columns {bad}; valid: {', '.join(table)}")
    return cols


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    if args.sweep == "alpha":
        rho, sigma = load_state(args.rho), load_state(args.sigma)
        cols = _columns(args.columns, ALPHA_COLUMNS, list(ALPHA_COLUMNS))
        rows = [[a, *(ALPHA_COLUMNS[c](rho, sigma, float(a)) for c in cols)] for a in grid]
        emit_csv(["alpha", *cols], rows)
    elif args.sweep == "gamma":
        rho, sigma = load_state(args.rho), load_state(args.sigma)
        if np.any(grid < 0):
            raise ValueError("gamma grid must be non-negative")
        fwd = e_gamma_unchecked(rho, sigma, grid)
        back = e_gamma_unchecked(sigma, rho, grid)
        emit_csv(["gamma", "E_gamma", "E_gamma_reverse"], zip(grid, fwd, back))
    else:
        cols = _columns(args.columns, P_COLUMNS, ["D", "NewRevPin0", "Thompson", "Eq1bound"])
        if args.family == "mix":
            if not (args.rho and args.sigma):
                raise ValueError("the mix family needs --rho and --sigma")
            r0, s0 = load_state(args.rho), load_state(args.sigma)

            def family(p):
                return (1 - p) * r0 + p * s0, s0
        else:
            family = FAMILIES[args.family]
        rows = []
        for p in grid:
            rho, sigma = (validate_density(m) for m in family(float(p)))
            rows.append([p, *(P_COLUMNS[c](rho, sigma) for c in cols)])
        emit_csv(["p", *cols], rows)
    return EXIT_OK


def _parse_dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValueError(f"--dims must be a comma list of integers, got {text!r}") from exc
    if not dims or any(d < 2 or d > 6 for d in dims):
        raise ValueError("dimensions must lie in 2..6")
    return dims


def cmd_verify(args) -> int:
    suites = list(verify.SUITES) if args.suite == "all" else [args.suite]
    if args.seeds < 1:
        raise ValueError("--seeds must be positive")
    bat = verify.run(suites, args.seeds, _parse_dims(args.dims))
    total = sum(p.violations for p in bat.props.values())
    doc = {
        "suite": args.suite,
        "seeds": args.seeds,
        "dims": _parse_dims(args.dims),
        "violations": total,
        "properties": {k: p.as_dict() for k, p in sorted(bat.props.items())},
    }
    if args.reports:
        doc["reports"] = [r.as_dict() for r in bat.reports]
    emit_json(doc)
    return EXIT_OK if total == 0 else 1


def _compute(fn, *a, **kw):
    """Run ``fn`` mapping any failure to the numerical exit code."""
    try:
        return fn(*a, **kw)
    except Exception as exc:  # noqa: BLE001 - the command contract maps every failure to 3
        raise CommandError(f"{type(exc).__name__}: {exc}", EXIT_NUMERICAL) from exc


def cmd_regularize(args) -> int:
    rho, sigma = load_state(args.rho), load_state(args.sigma)
    tr = _compute(regularization_trace, rho, sigma, args.alpha, args.n_max, args.tol)
    emit_json({
        "alpha": tr.alpha,
        "petz_ref": tr.petz_ref,
        "sandwiched_ref": tr.sandwiched_ref,
        "rows": [{"n": n, "per_n": v, "abs_error": e, "lower": lo, "upper": hi}
                 for n, (v, e), lo, hi in zip(tr.n_values, tr.per_n, tr.lower, tr.upper)],
        "violations": tr.violations(),
    })
    return EXIT_OK


def cmd_contraction(args) -> int:
    ch = load_channel(args.channel)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    if args.kind == "gamma":
        est = _compute(eta_gamma, ch, args.gamma, cfg)
    elif args.kind == "x2-local":
        sigma = load_state(args.sigma) if args.sigma else maximally_mixed(ch.dim_in)
        est = _compute(eta_x2_local, ch, sigma, cfg)
    elif args.kind == "x2-global":
        est = _compute(eta_x2_global, ch, cfg)
    else:
        if not args.f:
            raise ValueError("--kind f needs --f")
        est = _compute(eta_f_sampled, ch, parse_function(args.f), n_samples=args.samples,
                       seed=args.seed, cfg=cfg)
    doc = {"channel_spec": args.channel, "coefficient": args.kind,
           "estimate": est.value, "kind": est.kind, "witness": est.witness}
    if args.kind == "gamma":
        doc["gamma"] = args.gamma
    if args.kind == "f":
        doc["f"] = args.f
    emit_json(doc)
    return EXIT_OK


def cmd_dp_audit(args) -> int:
    ch = load_channel(args.channel)
    nb = load_neighbors(args.neighbors)
    rep = _compute(dpriv.check_dp, ch, nb, args.eps, args.delta)
    doc = rep.as_dict()
    doc["phi"] = dpriv.phi(args.eps, args.delta)
    emit_json(doc)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfdiv", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="one divergence or metric between two states")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--f", help="registry spec, e.g. kl or hellinger:alpha=0.5")
    which.add_argument("--renyi", type=float, metavar="ALPHA")
    which.add_argument("--metric", choices=sorted(METRICS))
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("sweep", help="CSV table over an alpha, gamma or p grid")
    p.add_argument("--sweep", choices=("alpha", "gamma", "p"), required=True)
    p.add_argument("--grid", required=True, help="start:stop:steps (inclusive linspace)")
    p.add_argument("--rho")
    p.add_argument("--sigma")
    p.add_argument("--family", choices=(*FAMILIES, "mix"), default="qubit-diagonal")
    p.add_argument("--columns", help="comma-separated column names")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="seeded property batteries")
    p.add_argument("--suite", required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--dims", default="2,3")
    p.add_argument("--reports", action="store_true", help="include every BoundReport")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("regularize", help="per-copy D_alpha on tensor powers")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_regularize)

    p = sub.add_parser("contraction", help="contraction coefficient estimates")
    p.add_argument("--channel", required=True, help="channel JSON or builtin spec")
    p.add_argument("--kind", choices=("gamma", "x2-local", "x2-global", "f"), default="gamma")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--sigma")
    p.add_argument("--f")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_contraction)

    p = sub.add_parser("dp-audit", help="(eps, delta)-DP check over neighbouring pairs")
    p.add_argument("--channel", required=True)
    p.add_argument("--neighbors", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.set_defaults(func=cmd_dp_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.suite not in (*verify.SUITES, "all"):
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)}, all",
              file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
