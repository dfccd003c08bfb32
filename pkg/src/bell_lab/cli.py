"""Command-line front end.

Subcommands: check, certify, search, simulate.  Exit codes: 0 all passed,
1 verdict failure or invariant violation, 2 input or I/O error, 3
resource guard tripped.  All JSON output is printed with sorted keys and
fixed indentation so identical inputs produce byte-identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .chsh import BoundViolationError, certify_lhv_bound
from .exact import correlation_set
from .models import (
    InvalidModelError,
    ModelFormatError,
    decimal_str,
    format_rational,
    load_model,
    model_hash,
    model_to_dict,
    validate_model,
)
from .reduction import verify_reduction
from .search import (
    SearchLimitError,
    SearchMode,
    SearchSpec,
    run_search,
    worker_count,
)
from .simulate import (
    empirical_chsh,
    no_signalling_report,
    quantum_reference,
    simulate_trials,
    verify_no_signalling,
)
from .unified import DEFAULT_CELL_LIMIT, SizeExceededError, verify_equivalence

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_GUARD = 3


def _emit(doc: dict, args) -> None:
    if args.format == "text":
        for line in _text_lines(doc):
            print(line)
        return
    if args.format == "csv":
        for key, value in _flat_items(doc, ()):
            print(f"{key},{value}")
        return
    rendered = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)


def _text_lines(doc, prefix=""):
    for key in sorted(doc):
        value = doc[key]
        if isinstance(value, dict):
            yield f"{prefix}{key}:"
            yield from _text_lines(value, prefix + "  ")
        else:
            yield f"{prefix}{key}: {value}"


def _flat_items(doc, path):
    for key in sorted(doc):
        value = doc[key]
        joined = ".".join((*path, str(key)))
        if isinstance(value, dict):
            yield from _flat_items(value, (*path, str(key)))
        else:
            yield joined, json.dumps(value) if isinstance(value, (list, str)) else value


def _load_checked(path):
    model = load_model(path)
    problems = validate_model(model)
    if problems:
        raise InvalidModelError(problems)
    return model


def cmd_check(args) -> int:
    model = load_model(args.model)
    problems = validate_model(model)
    if args.format == "json":
        _emit({"valid": not problems, "violations": problems}, args)
    else:
        for problem in problems:
            print(problem)
        if not problems:
            print("ok")
    return EXIT_OK if not problems else EXIT_VERDICT


def _rationals(values) -> list[str]:
    return [format_rational(v) for v in values]


def cmd_certify(args) -> int:
    model = _load_checked(args.model)
    equivalence = verify_equivalence(model, cell_limit=args.limit)
    reduction = verify_reduction(model)
    certificate = certify_lhv_bound(model)
    doc = {
        "command": "certify",
        "model_sha256": model_hash(model),
        "equivalence": {
            "contexts": [[c.alice, c.bob] for c in equivalence.contexts],
            "dedicated": _rationals(equivalence.dedicated),
            "factored": _rationals(equivalence.factored),
            "expanded": _rationals(equivalence.expanded),
            "equal": equivalence.equal,
        },
        "reduction": {
            "original": _rationals(reduction.original),
            "reduced": _rationals(reduction.reduced),
            "equal": reduction.equal,
        },
        "chsh": certificate.to_dict(),
        "all_passed": equivalence.equal
        and reduction.equal
        and certificate.report.bound_satisfied,
    }
    _emit(doc, args)
    return EXIT_OK if doc["all_passed"] else EXIT_VERDICT


def _parse_cardinalities(raw: str):
    try:
        values = tuple(int(part) for part in raw.split(","))
    except ValueError:
        raise ModelFormatError(f"cardinalities must be integers, got {raw!r}") from None
    if len(values) != 6:
        raise ModelFormatError(f"expected 6 cardinalities, got {len(values)}")
    return values


def cmd_search(args) -> int:
    spec = SearchSpec(
        cardinalities=_parse_cardinalities(args.cardinalities),
        mode=SearchMode(args.mode),
        seed=args.seed,
        budget=args.budget,
        assignment_limit=args.limit,
    )
    result = run_search(spec)
    certificate = certify_lhv_bound(result.best_model)
    doc = {
        "command": "search",
        "mode": spec.mode.value,
        "cardinalities": list(spec.cardinalities),
        "seed": spec.seed,
        "evaluated": result.evaluated,
        "workers": worker_count(),
        "rng_algorithm": result.rng_algorithm,
        "improvements": [[k, format_rational(s)] for k, s in result.improvements],
        "best_s_max": format_rational(result.best_s_max),
        "best_s_max_decimal": decimal_str(result.best_s_max),
        "best_model": model_to_dict(result.best_model),
        "certificate": certificate.to_dict(),
    }
    _emit(doc, args)
    return EXIT_OK


def _parse_angles(raw: str):
    parts = raw.split(",")
    if len(parts) != 4:
        raise ModelFormatError(f"--quantum needs 4 comma-separated angles, got {raw!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ModelFormatError(f"bad angle in {raw!r}") from None


def _context_section(ledger, exact_by_context):
    empirical = empirical_chsh(ledger)
    contexts = []
    for ctx, n_ctx, e_hat, se in zip(
        empirical.contexts,
        empirical.n_per_context,
        empirical.correlations,
        empirical.standard_errors,
    ):
        entry = {
            "alice": ctx[0],
            "bob": ctx[1],
            "n": n_ctx,
            "e_hat": e_hat,
            "standard_error": se,
        }
        if exact_by_context is not None:
            entry["e_exact"] = format_rational(exact_by_context[ctx])
            entry["e_exact_decimal"] = decimal_str(exact_by_context[ctx])
        contexts.append(entry)
    return empirical, contexts


def cmd_simulate(args) -> int:
    if (args.model is None) == (args.quantum is None):
        raise ModelFormatError("simulate needs exactly one of --model or --quantum")

    if args.quantum is not None:
        angles = _parse_angles(args.quantum)
        ledger = quantum_reference(angles, n=args.n, seed=args.seed)
        exact_by_context = None
        extra = {"quantum_angles": list(angles)}
    else:
        model = _load_checked(args.model)
        ledger = simulate_trials(model, n=args.n, seed=args.seed)
        exact = correlation_set(model)
        labels = [
            (a, b) for a in model.alice_labels for b in model.bob_labels
        ]
        order = (exact.e_xy, exact.e_xyp, exact.e_xpy, exact.e_xpyp)
        exact_by_context = dict(zip(labels, order))
        extra = {
            "model_sha256": model_hash(model),
            "exact_no_signalling_equal": verify_no_signalling(model).equal,
        }

    empirical, contexts = _context_section(ledger, exact_by_context)
    signalling = no_signalling_report(ledger)
    doc = {
        "command": "simulate",
        "n": ledger.n,
        "seed": ledger.seed,
        "contexts": contexts,
        "chsh": {
            "sums": list(empirical.sums),
            "s_max": empirical.s_max,
            "sum_standard_error": empirical.sum_standard_error,
        },
        "no_signalling": {
            "rows": [
                {
                    "side": row.side,
                    "setting": row.setting,
                    "outcome": row.outcome,
                    "remote": list(row.remote_labels),
                    "frequencies": list(row.frequencies),
                    "difference": row.difference,
                    "standard_error": row.standard_error,
                    "z": row.z,
                }
                for row in signalling.rows
            ],
            "max_abs_z": signalling.max_abs_z,
        },
        **extra,
    }

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger.to_csv(out_dir / "ledger.csv")
    summary = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    (out_dir / "summary.json").write_text(summary, encoding="utf-8")
    if args.histogram:
        _write_histogram(ledger, out_dir / "histogram.csv")
    if args.format == "text":
        for line in _text_lines(doc):
            print(line)
    else:
        sys.stdout.write(summary)
    return EXIT_OK


def _write_histogram(ledger, path) -> None:
    counts = ledger.context_counts()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("alice_setting,bob_setting,a,b,count\n")
        for (alice_label, bob_label), cells in counts.items():
            for (va, vb), count in cells.items():
                fh.write(
                    f"{alice_label},{bob_label},{va:+d},{vb:+d},{count}\n"
                )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bell-lab",
        description="Exact verification and seeded simulation of contextual "
        "local hidden-variable models of Bell experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="validate a model file")
    check.add_argument("--model", required=True, help="model JSON file")
    check.add_argument("--format", choices=("json", "text"), default="text")
    check.set_defaults(func=cmd_check)

    certify = sub.add_parser(
        "certify", help="verify equivalence, reduction, and the CHSH bound"
    )
    certify.add_argument("--model", required=True, help="model JSON file")
    certify.add_argument("--out", help="write the certificate JSON here")
    certify.add_argument(
        "--limit",
        type=int,
        default=DEFAULT_CELL_LIMIT,
        help="expanded product-space cell limit",
    )
    certify.add_argument("--format", choices=("json", "text", "csv"), default="json")
    certify.set_defaults(func=cmd_certify)

    search = sub.add_parser("search", help="search the strategy space")
    search.add_argument(
        "--mode",
        choices=[m.value for m in SearchMode],
        default=SearchMode.EXHAUSTIVE.value,
    )
    search.add_argument(
        "--cardinalities",
        default="2,2,1,1,1,1",
        help="six comma-separated sizes: source pair, Alice locals, Bob locals",
    )
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--budget", type=int, default=1000)
    search.add_argument(
        "--limit",
        type=int,
        default=2**24,
        help="assignment-count limit for exhaustive mode",
    )
    search.add_argument("--out", help="write the result JSON here")
    search.add_argument("--format", choices=("json", "text", "csv"), default="json")
    search.set_defaults(func=cmd_search)

    simulate = sub.add_parser("simulate", help="run seeded Monte Carlo trials")
    simulate.add_argument("--model", help="model JSON file")
    simulate.add_argument(
        "--quantum",
        help="four comma-separated angles: run the singlet reference instead",
    )
    simulate.add_argument("--n", type=int, default=100000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument(
        "--histogram",
        action="store_true",
        help="also write per-context outcome counts",
    )
    simulate.add_argument("--format", choices=("json", "text"), default="json")
    simulate.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidModelError as exc:
        for problem in exc.violations:
            print(problem, file=sys.stderr)
        return EXIT_VERDICT
    except BoundViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except (SizeExceededError, SearchLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
