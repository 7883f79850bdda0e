"""Command-line front end.

Subcommands: ``test`` runs one of the independence tests on a CSV
dataset, ``are`` computes an asymptotic relative efficiency, ``tables``
emits the efficiency and lower-bound grids, ``bound`` prints one lower
bound, and ``simulate`` runs a seeded Monte Carlo study from a JSON
config. Exit codes: 0 on success, 2 on input errors, 3 on degeneracy
or convergence failures.
"""
import argparse
import json
import math
import sys

import numpy as np

from .efficiency import are_vdw, are_wilcoxon, hl_lower_bound, table1, table2, table3
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    EllrankError,
    ModelError,
    SimulationError,
)
from .hypotests import PairedSample, sign_test, vdw_test, wilcoxon_test, wilks_test
from .montecarlo import SimConfig, run_study
from .radial import (
    Extremal,
    Gaussian,
    KonijnModel,
    RadialModel,
    StudentT,
    default_mixing,
)
from .ranksigns import BlockData

__all__ = ["main"]

REPORT_SCHEMA_VERSION = 1

# Fixed default master seed used whenever --seed is absent, so repeated
# invocations of the same command line stay byte-identical.
DEFAULT_SEED = 20260819


def parse_family(text):
    """Parse a radial family name: gauss[:scale], t:<nu>, extremal[:sigma]."""
    name, _, param = str(text).partition(":")
    name = name.strip().lower()
    param = param.strip()
    try:
        value = float(param) if param else None
    except ValueError:
        raise DomainError(f"family parameter {param!r} is not a number") from None
    if name == "gauss":
        return Gaussian(scale=value) if value is not None else Gaussian()
    if name == "t":
        if value is None:
            raise DomainError("family 't' needs a tail index, e.g. t:3")
        return StudentT(nu=value)
    if name == "extremal":
        return Extremal(sigma=value) if value is not None else Extremal()
    raise DomainError(
        f"unknown family {text!r}; use gauss[:scale], t:<nu>, or extremal[:sigma]"
    )


def _family_label(family):
    if isinstance(family, Gaussian):
        return f"gauss:{family.scale!r}"
    if isinstance(family, StudentT):
        return f"t:{family.nu!r}"
    if isinstance(family, Extremal):
        return f"extremal:{family.sigma!r}"
    return "custom"


def _read_dataset(path):
    """Parse a comma-separated numeric file, skipping one header row."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [line.rstrip("\n") for line in handle]
    except OSError as exc:
        raise DomainError(f"cannot read dataset {path!r}: {exc}") from None
    raw = [line for line in lines if line.strip()]
    if not raw:
        raise DomainError(f"dataset {path!r} has no rows")

    def cells_of(line):
        return [cell.strip() for cell in line.split(",")]

    first = cells_of(raw[0])
    start = 0
    try:
        [float(cell) for cell in first]
    except ValueError:
        start = 1  # non-numeric first row is a header
    rows = []
    width = None
    for offset, line in enumerate(raw[start:], start=start + 1):
        cells = cells_of(line)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DomainError(
                f"row {offset} has {len(cells)} columns, expected {width}"
            )
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise DomainError(
                    f"cell at row {offset}, column {col} is not numeric: {cell!r}"
                ) from None
            if not math.isfinite(value):
                raise DomainError(
                    f"cell at row {offset}, column {col} is not finite: {cell!r}"
                )
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise DomainError(f"dataset {path!r} has a header but no data rows")
    return np.array(rows, dtype=np.float64)


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)


def cmd_test(args):
    data = _read_dataset(args.path)
    cols = data.shape[1]
    if not 1 <= args.p < cols:
        raise DomainError(
            f"--p must satisfy 1 <= p < {cols} (the column count), got {args.p}"
        )
    sample = PairedSample(
        BlockData(args.p, data[:, : args.p]),
        BlockData(cols - args.p, data[:, args.p :]),
    )
    if args.method == "wilks":
        result = wilks_test(sample, alpha=args.alpha)
    else:
        fn = {"sign": sign_test, "wilcoxon": wilcoxon_test, "vdw": vdw_test}[
            args.method
        ]
        result = fn(sample, estimator=args.estimator, alpha=args.alpha)
    payload = {
        "method": result.method,
        "statistic": result.statistic,
        "df": result.df,
        "p_value": result.p_value,
        "alpha": result.alpha,
        "reject": result.reject,
    }
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        decision = "reject" if result.reject else "fail to reject"
        print(f"method: {result.method}")
        print(f"statistic: {result.statistic!r}")
        print(f"df: {result.df}")
        print(f"p-value: {result.p_value!r}")
        print(f"decision: {decision} independence at alpha={result.alpha!r}")
    return 0


def cmd_are(args):
    fam_f = parse_family(args.f)
    fam_g = parse_family(args.g)
    fn = are_vdw if args.method == "vdw" else are_wilcoxon
    res = fn(args.p, fam_f, args.q, fam_g)
    payload = {
        "method": res.method,
        "p": res.p,
        "q": res.q,
        "f": _family_label(fam_f),
        "g": _family_label(fam_g),
        "value": res.value,
        "c_p": res.c_p,
        "d_p": res.d_p,
        "c_q": res.c_q,
        "d_q": res.d_q,
        "a_diag": res.a_diag,
        "b_diag": res.b_diag,
    }
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for key in (
            "method", "p", "q", "f", "g",
            "value", "c_p", "d_p", "c_q", "d_q", "a_diag", "b_diag",
        ):
            value = payload[key]
            shown = repr(value) if isinstance(value, float) else value
            print(f"{key}: {shown}")
    return 0


def _nu_text(nu):
    return "inf" if math.isinf(nu) else repr(nu)


def _csv_table(rows, columns):
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row[col]
            cells.append(repr(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _markdown_grid(rows):
    """Pivot (q, nu_q) x nu_p layout for the two efficiency grids."""
    nu_ps = []
    for row in rows:
        if row["nu_p"] not in nu_ps:
            nu_ps.append(row["nu_p"])
    cells = {(row["q"], row["nu_q"], row["nu_p"]): row["value"] for row in rows}
    groups = []
    for row in rows:
        key = (row["q"], row["nu_q"])
        if key not in groups:
            groups.append(key)
    header = "| q | nu_q | " + " | ".join(f"nu_p={_nu_text(v)}" for v in nu_ps) + " |"
    rule = "|" + "---|" * (2 + len(nu_ps))
    lines = [header, rule]
    for q, nu_q in groups:
        vals = " | ".join(f"{cells[(q, nu_q, nu_p)]:.3f}" for nu_p in nu_ps)
        lines.append(f"| {q} | {_nu_text(nu_q)} | {vals} |")
    return "\n".join(lines) + "\n"


def _markdown_bounds(rows):
    """Upper-triangular p x q layout for the lower-bound grid."""
    dims = []
    for row in rows:
        if row["p"] not in dims:
            dims.append(row["p"])
    cells = {(row["p"], row["q"]): row["value"] for row in rows}
    header = "| p \\ q | " + " | ".join(str(q) for q in dims) + " |"
    rule = "|" + "---|" * (1 + len(dims))
    lines = [header, rule]
    for p in dims:
        vals = []
        for q in dims:
            value = cells.get((p, q))
            vals.append("" if value is None else f"{value:.3f}")
        lines.append(f"| {p} | " + " | ".join(vals) + " |")
    return "\n".join(lines) + "\n"


def cmd_tables(args):
    if args.which == 1:
        rows = table1()
        columns = ("p", "q", "nu_p", "nu_q", "value")
    elif args.which == 2:
        rows = table2()
        columns = ("p", "q", "nu_p", "nu_q", "value")
    else:
        rows = table3()
        columns = ("p", "q", "value")
    if args.format == "csv":
        text = _csv_table(rows, columns)
    elif args.which == 3:
        text = _markdown_bounds(rows)
    else:
        text = _markdown_grid(rows)
    _emit(text, args.out)
    return 0


def cmd_bound(args):
    res = hl_lower_bound(args.p, args.q)
    payload = {
        "p": res.p,
        "q": res.q,
        "c_p": res.c_p,
        "c_q": res.c_q,
        "omega_p": res.omega_p,
        "omega_q": res.omega_q,
        "bound": res.bound,
    }
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for key in ("p", "q", "c_p", "c_q", "omega_p", "omega_q", "bound"):
            value = payload[key]
            shown = repr(value) if isinstance(value, float) else value
            print(f"{key}: {shown}")
    return 0


def _config_from_json(doc, seed_override):
    if not isinstance(doc, dict):
        raise DomainError("simulation config must be a JSON object")
    required = ("p", "q", "n", "f", "g", "tests", "replications")
    for field in required:
        if field not in doc:
            raise DomainError(f"simulation config is missing the field {field!r}")
    p = doc["p"]
    q = doc["q"]
    fam_f = parse_family(doc["f"])
    fam_g = parse_family(doc["g"])
    if "m" in doc and doc["m"] is not None:
        mixing = np.asarray(doc["m"], dtype=np.float64)
    else:
        mixing = default_mixing(p, q)
    konijn = KonijnModel(
        p=p,
        q=q,
        f=RadialModel(p, fam_f),
        g=RadialModel(q, fam_g),
        m=mixing,
        delta=float(doc.get("delta", 0.0)),
        n=doc["n"],
    )
    if seed_override is not None:
        seed = seed_override
    else:
        seed = doc.get("master_seed", DEFAULT_SEED)
    return SimConfig(
        konijn=konijn,
        tests=tuple(doc["tests"]),
        alpha=float(doc.get("alpha", 0.05)),
        replications=doc["replications"],
        estimator=doc.get("estimator", "tyler"),
        master_seed=seed,
    )


def cmd_simulate(args):
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise DomainError(f"cannot read config {args.config!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"config {args.config!r} is not valid JSON: {exc}") from None
    config = _config_from_json(doc, args.seed)
    report = run_study(config, n_jobs=args.jobs)
    payload = {"schema_version": REPORT_SCHEMA_VERSION}
    payload.update(report.to_dict())
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ellrank",
        description=(
            "Rank-based tests of independence between two elliptical "
            "random vectors, with an asymptotic efficiency engine."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one test on a CSV dataset")
    p_test.add_argument("path", help="comma-separated dataset, optional header row")
    p_test.add_argument("--p", type=int, required=True,
                        help="width of the first block (columns 1..p)")
    p_test.add_argument("--method", required=True,
                        choices=("wilks", "sign", "wilcoxon", "vdw"))
    p_test.add_argument("--estimator", default="tyler",
                        choices=("tyler", "moment"))
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--format", default="text", choices=("json", "text"))
    p_test.set_defaults(func=cmd_test)

    p_are = sub.add_parser("are", help="asymptotic relative efficiency")
    p_are.add_argument("--p", type=int, required=True)
    p_are.add_argument("--f", required=True,
                       help="first radial family: gauss[:scale], t:<nu>, extremal[:sigma]")
    p_are.add_argument("--q", type=int, required=True)
    p_are.add_argument("--g", required=True, help="second radial family")
    p_are.add_argument("--method", required=True, choices=("vdw", "wilcoxon"))
    p_are.add_argument("--format", default="text", choices=("json", "text"))
    p_are.set_defaults(func=cmd_are)

    p_tab = sub.add_parser("tables", help="emit an efficiency or bound grid")
    p_tab.add_argument("--which", type=int, required=True, choices=(1, 2, 3))
    p_tab.add_argument("--out", default=None, help="output path (default stdout)")
    p_tab.add_argument("--format", default="csv", choices=("csv", "markdown"))
    p_tab.set_defaults(func=cmd_tables)

    p_bound = sub.add_parser("bound", help="efficiency lower bound for (p, q)")
    p_bound.add_argument("--p", type=int, required=True)
    p_bound.add_argument("--q", type=int, required=True)
    p_bound.add_argument("--format", default="text", choices=("json", "text"))
    p_bound.set_defaults(func=cmd_bound)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    p_sim.add_argument("--config", required=True, help="JSON simulation config")
    p_sim.add_argument("--out", default=None, help="report path (default stdout)")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the config master seed")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="worker processes for the replicates")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except (DegenerateDataError, ConvergenceError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ModelError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EllrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
