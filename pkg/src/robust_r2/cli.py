"""Command-line interface.

Every subcommand prints one JSON document on stdout (or an aligned text
table with ``--format table``).  Exit codes: 0 success, 1 usage error,
2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import joint, montecarlo, partial, r2, screening, simgen
from .data import from_csv, to_csv
from .exceptions import DataError, DomainError, NumericalError
from .montecarlo import dumps17

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _subsets(text):
    """``"1;2;1,2"`` -> [(0,), (1,), (0, 1)] (1-based on the command line)."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        idx = _int_list(part)
        if not idx or min(idx) < 1:
            raise argparse.ArgumentTypeError(f"subset {part!r} needs 1-based indices")
        out.append(tuple(sorted(i - 1 for i in idx)))
    return out


def _add_common(p, data=True, response=True):
    if data:
        p.add_argument("--data", required=True, help="CSV file with a header row")
    if response:
        p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("--format", choices=("json", "table"), default="json")


def build_parser():
    parser = _Parser(prog="robust-r2", description="Robust inference for R^2 and screening.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ci", help="confidence interval for R^2")
    _add_common(p)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--quantile", choices=("student", "normal"), default="student")

    p = sub.add_parser("joint", help="individual R^2's with joint covariance")
    _add_common(p)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--subsets", type=_subsets, help='product-feature subsets, e.g. "1;2;1,2"')
    p.add_argument("--means", type=_float_list, help="population means used to center inputs")

    p = sub.add_parser("partial", help="partial R^2 of two columns given others")
    _add_common(p, response=False)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--z", default="", help="comma-separated confounder columns")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--quantile", choices=("student", "normal"), default="student")

    p = sub.add_parser("screen", help="marginal screening")
    _add_common(p)
    p.add_argument("--q", type=float, default=0.15)

    p = sub.add_parser("simulate", help="write a simulated dataset and its ground truth")
    _add_common(p, data=False, response=False)
    p.add_argument("--model", required=True, choices=[k.value for k in simgen.ModelKind])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out", required=True, help="CSV path; ground truth goes next to it")

    p = sub.add_parser("coverage", help="Monte Carlo coverage of the R^2 interval")
    _add_common(p, data=False, response=False)
    p.add_argument("--model", required=True, choices=[k.value for k in simgen.ModelKind])
    p.add_argument("--n-list", type=_int_list, default=[200, 500, 1000])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--quantile", choices=("student", "normal"), default="student")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("screening-bench", help="Monte Carlo screening benchmark")
    _add_common(p, data=False, response=False)
    p.add_argument("--q", type=float, default=0.15)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    return parser


def _kv_table(doc):
    rows = []
    for k, v in doc.items():
        if isinstance(v, (list, dict)):
            v = json.dumps(v)
        elif isinstance(v, float):
            v = f"{v:.6g}"
        rows.append((str(k), str(v)))
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows) + "\n"


def _emit(doc, fmt, table=None):
    if fmt == "table":
        return table if table is not None else _kv_table(doc)
    return dumps17(doc) + "\n"


def _cmd_ci(a):
    d = from_csv(a.data, a.response)
    inf = r2.estimate(d)
    ci = r2.confidence_interval(inf, a.delta, a.quantile)
    lo, hi = ci.clipped
    doc = {
        "r2_hat": inf.r2_hat,
        "v_hat": inf.v_hat,
        "lower": ci.lower,
        "upper": ci.upper,
        "lower_clipped": lo,
        "upper_clipped": hi,
        "level": ci.level,
        "quantile": a.quantile,
        "n": d.n,
        "p": d.p,
        "degeneracy": r2.degeneracy_check(inf).value,
    }
    return _emit(doc, a.format)


def _cmd_joint(a):
    d = from_csv(a.data, a.response)
    res = joint.individual_r2s(d)
    cis = joint.marginal_cis(res, a.delta)
    doc = {
        "n": d.n,
        "p": d.p,
        "columns": list(d.names),
        "r2_individual": res.r2_individual.tolist(),
        "marginal_cis": [[c.lower, c.upper] for c in cis],
        "cov_hat": res.cov_hat.tolist(),
    }
    if a.means is not None and a.subsets is None:
        raise DomainError("--means only applies together with --subsets")
    if a.subsets is not None:
        if a.means is not None and len(a.means) != d.p:
            raise DomainError(f"--means needs {d.p} values, got {len(a.means)}")
        means = a.means if a.means is not None else d.x.mean(axis=0)
        vals = joint.product_feature_r2(
            d, means, a.subsets, empirical_centering=a.means is None
        )
        doc["product_features"] = [
            {"subset": [i + 1 for i in s], "r2": float(v)} for s, v in zip(a.subsets, vals)
        ]
        doc["centering"] = "supplied" if a.means is not None else "empirical"
    table = None
    if a.format == "table":
        rows = [["column", "R2", "lower", "upper"]]
        rows += [
            [name, f"{v:.6g}", f"{c.lower:.6g}", f"{c.upper:.6g}"]
            for name, v, c in zip(d.names, res.r2_individual, cis)
        ]
        table = montecarlo._grid(rows) + "\n"
        for item in doc.get("product_features", []):
            table += f"subset {item['subset']}: R2 = {item['r2']:.6g}\n"
    return _emit(doc, a.format, table)


def _cmd_partial(a):
    d = from_csv(a.data, a.y, require_rows=False)
    zs = [s.strip() for s in a.z.split(",") if s.strip()]
    x = d.x[:, d.column(a.x)]
    z = d.x[:, [d.column(c) for c in zs]] if zs else None
    inf = partial.partial_r2(x, d.y, z)
    ci = partial.partial_r2_ci(inf, a.delta, a.quantile)
    lo, hi = ci.clipped
    doc = {
        "r2_partial": inf.r2_partial,
        "v_hat": inf.v_hat,
        "lower": ci.lower,
        "upper": ci.upper,
        "lower_clipped": lo,
        "upper_clipped": hi,
        "level": ci.level,
        "quantile": a.quantile,
        "n": inf.n,
        "x": a.x,
        "y": a.y,
        "z": zs,
    }
    return _emit(doc, a.format)


def _cmd_screen(a):
    d = from_csv(a.data, a.response, require_rows=False)
    res = screening.screen(d.x, d.y, a.q)
    sel = sorted(res.selected)
    stats = [None if not np.isfinite(s) else float(s) for s in res.statistics]
    doc = {
        "q": a.q,
        "threshold": res.threshold,
        "n": d.n,
        "p": d.p,
        "selected": [j + 1 for j in sel],
        "selected_names": [d.names[j] for j in sel],
        "statistics": stats,
    }
    table = None
    if a.format == "table":
        rows = [["index", "column", "statistic"]]
        rows += [[str(j + 1), d.names[j], f"{res.statistics[j]:.4f}"] for j in sel]
        table = (
            f"threshold {res.threshold:.6f} (q = {a.q:g}); {len(sel)} of {d.p} selected\n"
            + montecarlo._grid(rows)
            + "\n"
        )
    return _emit(doc, a.format, table)


def _cmd_simulate(a):
    spec = simgen.ModelSpec(simgen.ModelKind(a.model), a.noise_scale)
    d, truth = simgen.generate(spec, a.n, a.seed)
    out = Path(a.out)
    truth_path = out.with_suffix(".truth.json")
    to_csv(d, out)
    tdoc = {"model": a.model, "noise_scale": a.noise_scale, "n": a.n, "seed": a.seed}
    tdoc.update(truth.as_dict())
    truth_path.write_text(dumps17(tdoc) + "\n", encoding="utf-8")
    doc = {"csv": str(out), "truth": str(truth_path), "n": d.n, "p": d.p, **tdoc}
    return _emit(doc, a.format)


def _cmd_coverage(a):
    spec = simgen.ModelSpec(simgen.ModelKind(a.model))
    rep = montecarlo.coverage_experiment(
        spec, a.n_list, a.reps, a.delta, a.quantile, a.seed, workers=a.workers
    )
    return _emit(rep.to_dict(), a.format, rep.to_table())


def _cmd_screening_bench(a):
    rep = montecarlo.screening_experiment(a.q, a.n, a.reps, a.seed, workers=a.workers)
    return _emit(rep.to_dict(), a.format, rep.to_table())


_COMMANDS = {
    "ci": _cmd_ci,
    "joint": _cmd_joint,
    "partial": _cmd_partial,
    "screen": _cmd_screen,
    "simulate": _cmd_simulate,
    "coverage": _cmd_coverage,
    "screening-bench": _cmd_screening_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"robust-r2: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"robust-r2: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"robust-r2: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
