"""
Main Batch Driver
Controller layer: parses the command line, runs the study services and
hands rows to the publisher. Errors map onto process exit codes.
"""
import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from quasipower.config import (
    DEFAULT_SERIES_ORDER,
    DEFAULT_T_SWEEP,
    DEFAULT_TOL,
    ENUMERATION_CERTIFY_DEPTH,
    EXIT_CAPACITY,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_USAGE,
    EXAMPLE_GRAMMAR,
    get_columns,
)
from quasipower.errors import CapacityError, LabError
from quasipower.schemas import (
    DissectionSpec,
    Grammar,
    LatticeDistribution,
    QuasiPowerFamily,
    RunConfig,
    exact_from_json,
)
from quasipower.services.berry_esseen import verify_inequality
from quasipower.services.dissection_model import dissection_counts, parse_dissection_spec
from quasipower.services.distribution_core import from_weights, moment_matched_gaussian
from quasipower.services.grammar_counting import CountTable, certify_unambiguity, count_words, parse_grammar
from quasipower.services.partition_lattice import enumerate_partitions, mobius_coefficient
from quasipower.services.quasi_power_lab import (
    coin_distribution,
    convergence_study,
    degenerate_demo,
    dissection_family,
    grammar_family,
    iid_sum_family,
    moment_check,
    product_family,
    reduce_dependent_axes,
    standardized_distribution,
)
from quasipower.services.report_writer import write_report

MODELS = ("coin", "binomial-pair", "iid", "grammar", "dissection")
IID_MODELS = ("coin", "binomial-pair", "iid")


# --- Input loading ---

def load_grammar(path: Optional[str]) -> Grammar:
    """The grammar in path, or the built-in example grammar."""
    text = Path(path).read_text(encoding="utf-8") if path else EXAMPLE_GRAMMAR
    return parse_grammar(text)


def load_classes(value: Optional[str]) -> DissectionSpec:
    """
    Size classes from '{"classes": [[3],[4]]}', a bare '[[3],[4]]', or a JSON file.
    Defaults to triangles and quadrilaterals.
    """
    if not value:
        return DissectionSpec(classes=((3,), (4,)))
    text = value
    if not value.lstrip().startswith(("{", "[")):
        text = Path(value).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        text = json.dumps({"classes": json.loads(text)})
    return parse_dissection_spec(text)


def _exact_number(text: str) -> Any:
    value = Fraction(text.strip())
    return int(value) if value.denominator == 1 else value


def load_base(value: Optional[str]) -> LatticeDistribution:
    """
    Base distribution of an iid family.

    Accepts an inline or file JSON payload ({"dim", "atoms": [{"x", "w"}]} or a
    bare list of [point, weight] pairs), or a CSV file with rows x1,...,xm,weight.
    Repeated points have their weights added.

    Raises:
        ValueError: If no base is given or a row is malformed.
    """
    if not value:
        raise ValueError("--model iid needs --base")
    inline = value.lstrip().startswith(("{", "["))
    if not inline and Path(value).suffix.lower() == ".csv":
        atoms: Dict[Tuple[Any, ...], int] = {}
        with open(value, newline="", encoding="utf-8") as handle:
            for line, row in enumerate(csv.reader(handle), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) < 2:
                    raise ValueError(f"{value}, line {line}: expected x1,...,xm,weight")
                point = tuple(_exact_number(c) for c in row[:-1])
                atoms[point] = atoms.get(point, 0) + int(row[-1])
        return from_weights(atoms)
    payload = json.loads(value if inline else Path(value).read_text(encoding="utf-8"))
    if isinstance(payload, dict):
        return LatticeDistribution.from_payload(payload)
    atoms = {}
    for point, weight in payload:
        key = tuple(exact_from_json(c) for c in point)
        atoms[key] = atoms.get(key, 0) + int(weight)
    return from_weights(atoms)


def build_family(args: argparse.Namespace) -> QuasiPowerFamily:
    """
    Raises:
        ValueError: If the model is unknown.
    """
    order = max(DEFAULT_SERIES_ORDER, sum(getattr(args, "k", None) or []))
    if args.model == "coin":
        return iid_sum_family(coin_distribution(-1, 1), order=order)
    if args.model == "binomial-pair":
        bit = coin_distribution(0, 1)
        return product_family(bit, bit, order=order)
    if args.model == "iid":
        return iid_sum_family(load_base(args.base), order=order)
    if args.model == "grammar":
        return grammar_family(load_grammar(args.grammar_file))
    if args.model == "dissection":
        return dissection_family(load_classes(args.classes))
    raise ValueError(f"unknown model '{args.model}'")


def _run_config(args: argparse.Namespace, notes: Optional[Dict[str, Any]] = None) -> RunConfig:
    parameters = {
        key: value for key, value in vars(args).items()
        if key not in ("handler", "command", "out", "format") and value is not None
    }
    return RunConfig(
        command=args.command,
        parameters=parameters,
        output_path=args.out,
        output_format=args.format,
        notes=notes or {},
    )


def _family_notes(fam: QuasiPowerFamily) -> Dict[str, Any]:
    return {key: value for key, value in fam.metadata.items() if key == "probability_model"}


# --- Commands ---

def cmd_partitions(args: argparse.Namespace) -> int:
    rows = [
        {"index": index, "blocks": [list(b) for b in alpha.blocks], "num_blocks": alpha.size,
         "mobius": mobius_coefficient(alpha)}
        for index, alpha in enumerate(enumerate_partitions(range(1, args.m + 1)), start=1)
    ]
    write_report(_run_config(args), get_columns("partitions"), rows)
    return EXIT_OK


def cmd_be_bound(args: argparse.Namespace) -> int:
    if any(T <= 0 for T in args.T):
        raise ValueError(f"every T must be positive, got {args.T}")
    notes: Dict[str, Any] = {}
    if args.distribution:
        payload = json.loads(Path(args.distribution).read_text(encoding="utf-8"))
        X = LatticeDistribution.from_payload(payload)
        g = moment_matched_gaussian(X)
        notes["reference"] = "moment-matched normal"
    else:
        fam = build_family(args)
        X, g = standardized_distribution(fam, args.n, "exact")
        X, g, axes = reduce_dependent_axes(X, g)
        notes.update(_family_notes(fam))
        notes["axes"] = list(axes)
    checks = verify_inequality(X, g, args.T, tol=args.tol, recursive=args.mode == "recursive")
    csv_rows = [
        {"T": c.T, "integral": c.report.integral_term, "marginal": c.report.marginal_term,
         "smoothing": c.report.smoothing_term, "rhs": c.rhs, "lhs": c.lhs, "holds": c.holds}
        for c in checks
    ]
    json_rows = [c.model_dump(mode="json") for c in checks]
    write_report(_run_config(args, notes), get_columns("bound"), csv_rows, json_rows)
    if not all(c.report.quadrature_converged for c in checks):
        print("[BerryEsseen] quadrature flagged as non-converged", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_clt_study(args: argparse.Namespace) -> int:
    if args.degenerate:
        rows = degenerate_demo(args.n, tol=args.tol)
        csv_rows = [row.model_dump(mode="json") for row in rows]
        write_report(_run_config(args), get_columns("degenerate"), csv_rows)
        return EXIT_OK
    fam = build_family(args)
    rows = convergence_study(fam, args.n, mode=args.mode, tol=args.tol)
    notes = _family_notes(fam)
    if rows and any(len(row.axes) < fam.dim for row in rows):
        notes["axes"] = list(rows[0].axes)
    csv_rows = [
        {"n": row.n, "phi_n": row.phi_n, "d_n": row.distance, "d_n_sqrt_phi": row.normalized, "mode": row.mode}
        for row in rows
    ]
    write_report(_run_config(args, notes), get_columns("study"), csv_rows,
                 [row.model_dump(mode="json") for row in rows])
    return EXIT_OK


def cmd_moments(args: argparse.Namespace) -> int:
    if args.model not in IID_MODELS:
        raise ValueError(f"moment checks need an exact quasi-power family ({', '.join(IID_MODELS)})")
    fam = build_family(args)
    rows = moment_check(fam, args.k, args.n)
    csv_rows = [row.model_dump(mode="json") for row in rows]
    write_report(_run_config(args), get_columns("moments"), csv_rows)
    return EXIT_OK


def cmd_grammar_counts(args: argparse.Namespace) -> int:
    grammar = load_grammar(args.grammar_file)
    table = CountTable(grammar)
    axes = list(grammar.tracked)
    rows: List[Dict[str, Any]] = []
    for n in sorted(set(args.n)):
        for x, count in sorted(count_words(grammar, n, table=table).items()):
            rows.append({"n": n, **dict(zip(axes, x)), "count": count})
    depth = min(ENUMERATION_CERTIFY_DEPTH, max(args.n))
    notes = {
        "counts": "leftmost derivations",
        "unambiguity_certified_to": depth if certify_unambiguity(grammar, depth) else "not certified",
    }
    write_report(_run_config(args, notes), get_columns("grammar_counts", axes), rows)
    return EXIT_OK


def cmd_dissection_counts(args: argparse.Namespace) -> int:
    spec = load_classes(args.classes)
    axes = [f"r{i}" for i in range(1, spec.num_classes + 1)]
    rows: List[Dict[str, Any]] = []
    for n in sorted(set(args.n)):
        for r, count in dissection_counts(spec, n).items():
            rows.append({"n": n, **dict(zip(axes, r)), "count": count})
    notes = {"probability_model": "uniform over dissections"}
    write_report(_run_config(args, notes), get_columns("dissection_counts", axes), rows)
    return EXIT_OK


# --- Parser ---

def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Output file (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_model(parser: argparse.ArgumentParser, choices: Sequence[str] = MODELS, default: str = "coin") -> None:
    parser.add_argument("--model", choices=choices, default=default)
    parser.add_argument("--grammar-file", default=None, help="Grammar file (built-in example when omitted)")
    parser.add_argument("--classes", default=None, help='Dissection classes, e.g. \'{"classes": [[3],[4]]}\'')
    parser.add_argument("--base", default=None, help="iid base atoms: JSON payload, [[point, weight], ...] or CSV file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasipower-lab",
        description="Berry-Esseen bounds and quasi-power convergence studies",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    partitions = commands.add_parser("partitions", help="List set partitions with Mobius values")
    partitions.add_argument("--m", type=int, required=True)
    _add_output(partitions)
    partitions.set_defaults(handler=cmd_partitions)

    bound = commands.add_parser("be-bound", help="Berry-Esseen right-hand side sweep over T")
    _add_model(bound, default="binomial-pair")
    bound.add_argument("--distribution", default=None, help="LatticeDistribution JSON payload file")
    bound.add_argument("--n", type=int, default=100)
    bound.add_argument("--T", type=float, nargs="+", default=list(DEFAULT_T_SWEEP))
    bound.add_argument("--tol", type=float, default=DEFAULT_TOL)
    bound.add_argument("--mode", choices=("theorem", "recursive"), default="theorem",
                       help="theorem: Lambda_L integral plus marginals; recursive: fully expanded bound")
    _add_output(bound)
    bound.set_defaults(handler=cmd_be_bound)

    study = commands.add_parser("clt-study", help="Kolmogorov distance convergence study")
    _add_model(study)
    study.add_argument("--n", type=int, nargs="+", required=True)
    study.add_argument("--mode", choices=("exact", "analytic"), default="exact")
    study.add_argument("--tol", type=float, default=DEFAULT_TOL)
    study.add_argument("--degenerate", action="store_true", help="Run the point-mass counterexample instead")
    _add_output(study)
    study.set_defaults(handler=cmd_clt_study)

    moments = commands.add_parser("moments", help="Exact moments against moment polynomials")
    _add_model(moments, choices=IID_MODELS)
    moments.add_argument("--k", type=int, nargs="+", required=True)
    moments.add_argument("--n", type=int, nargs="+", required=True)
    _add_output(moments)
    moments.set_defaults(handler=cmd_moments)

    grammar = commands.add_parser("grammar-counts", help="Joint word counts of a context-free grammar")
    grammar.add_argument("--grammar-file", default=None)
    grammar.add_argument("--n", type=int, nargs="+", required=True)
    _add_output(grammar)
    grammar.set_defaults(handler=cmd_grammar_counts)

    dissections = commands.add_parser("dissection-counts", help="Joint polygon-dissection counts")
    dissections.add_argument("--classes", default=None)
    dissections.add_argument("--n", type=int, nargs="+", required=True)
    _add_output(dissections)
    dissections.set_defaults(handler=cmd_dissection_counts)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs one command.

    Returns:
        0 success, 1 usage error, 2 capacity error, 3 flagged quadrature.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except CapacityError as e:
        print(f"Capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (LabError, ValueError, KeyError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
