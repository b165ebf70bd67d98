"""
Fano CLI
========
Command-line front end. Every subcommand reads JSON inputs, computes
exactly, and writes one JSON document to stdout (keys sorted, rationals as
strings).

Exit codes: 0 success, 1 unreadable input or bad usage, 2 a mathematical
precondition failed (line not on the cubic, singular along the line,
degenerate Pfaffian, ...).

Usage:
    python fano_cli.py form --cubic data/samples/fermat.json --line data/samples/l0.json
    python fano_cli.py pfaffian --matrix data/samples/m.json --twists -3..3
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Dict, List, Optional, Tuple

from cech_pairing import (
    connecting_sigma_from_quadrics,
    gram_from_quadrics,
    lagrangian_defects,
    sigma_splitting_components,
)
from cubic_geometry import (
    DEFAULT_COEFF_BOUND,
    contains_line,
    cubic_from_json,
    line_from_json,
    smooth_along_line,
)
from exact_algebra import (
    GeometryError,
    LineNotOnCubicError,
    PositiveCharacteristicWarning,
    format_scalar,
    make_field,
)
from fano_sampler import records_to_json, sample_lines_mod_p, sample_random_lines, summarize, write_report
from fano_tangent import section_basis, smooth_restriction, splitting_from_quadrics
from pfaffian_threefolds import (
    DEFAULT_PROBE_PRIME,
    DEFAULT_TWISTS,
    generic_skew_linear_matrix,
    graded_cohomology_table,
    matrix_to_json,
    pfaffian,
    skew_matrix_from_json,
    table_to_json,
    vanishing_band_holds,
)

class UsageError(ValueError):
    """Bad command line; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_twists(text: str) -> Tuple[int, int]:
    """'a..b' -> (a, b), inclusive."""
    try:
        low, high = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"twists must look like a..b, got {text!r}")
    if low > high:
        raise UsageError(f"empty twist range {text!r}")
    return low, high


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--twists -3..0" would otherwise be read as an option
    for i, token in enumerate(argv[:-1]):
        if token == "--twists":
            argv[i:i + 2] = [f"--twists={argv[i + 1]}"]
            break

    parser = _Parser(prog="fano_cli", description="Exact computations on lines of cubic fourfolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_field(p):
        p.add_argument("--prime", type=int, default=None, help="compute over GF(p) instead of QQ")
        return p

    def with_line(p):
        p.add_argument("--cubic", required=True, help="cubic JSON file")
        p.add_argument("--line", required=True, help="line JSON file")
        return with_field(p)

    with_line(sub.add_parser("verify-line", help="check that the line lies on the cubic"))
    with_line(sub.add_parser("tangent", help="tangent space of F(Y) at the line"))
    with_line(sub.add_parser("splitting-type", help="splitting type of the normal bundle"))
    with_line(sub.add_parser("form", help="Gram matrix of the 2-form at the line"))

    sample = with_field(sub.add_parser("sample", help="sample lines and check the 2-form"))
    sample.add_argument("--count", type=int, default=20)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--coeff-bound", type=int, default=DEFAULT_COEFF_BOUND)
    sample.add_argument("--cubic", default=None, help="enumerate the GF(p)-lines of this cubic instead")
    sample.add_argument("--limit", type=int, default=None)
    sample.add_argument("--workers", type=int, default=None)
    sample.add_argument("--report", default=None, help="Excel report path")

    pf = sub.add_parser("pfaffian", help="Pfaffian cubic threefold and cohomology table")
    pf.add_argument("--matrix", default=None, help="skew matrix JSON file")
    pf.add_argument("--seed", type=int, default=None, help="draw a generic matrix instead")
    pf.add_argument("--coeff-bound", type=int, default=2)
    pf.add_argument("--twists", type=parse_twists, default=DEFAULT_TWISTS)
    pf.add_argument("--probe-prime", type=int, default=DEFAULT_PROBE_PRIME)

    args = parser.parse_args(argv)
    if args.command == "pfaffian" and (args.matrix is None) == (args.seed is None):
        raise UsageError("pfaffian needs exactly one of --matrix or --seed")
    if args.command == "sample" and args.cubic is not None and getattr(args, "prime", None) is None:
        raise UsageError("sample --cubic needs --prime")
    return args


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cubic_and_line(args, field):
    return cubic_from_json(_load_json(args.cubic), field), line_from_json(_load_json(args.line), field)


def _form_to_json(form) -> List[Dict]:
    return [{"exp": list(exp), "coeff": format_scalar(c)} for exp, c in form.terms]


def _vectors_to_json(vectors) -> List[List[List[str]]]:
    return [v.to_json() for v in vectors]


def cmd_verify_line(args, field) -> Dict:
    Y, line = _cubic_and_line(args, field)
    if not contains_line(Y, line):
        raise LineNotOnCubicError("line is not contained in the cubic")
    return {"on_cubic": True, "smooth_along_line": smooth_along_line(Y, line)}


def cmd_tangent(args, field) -> Dict:
    Y, line = _cubic_and_line(args, field)
    basis = section_basis(smooth_restriction(Y, line), 0)
    return {"dimension": len(basis), "basis": _vectors_to_json(basis)}


def cmd_splitting_type(args, field) -> Dict:
    Y, line = _cubic_and_line(args, field)
    sd = splitting_from_quadrics(smooth_restriction(Y, line))
    return {
        "type": sd.kind.value,
        "h0": {str(j): v for j, v in sd.h0_table.items()},
        "generators": _vectors_to_json(sd.generators),
        "complements": _vectors_to_json(sd.complements),
    }


def cmd_form(args, field) -> Dict:
    Y, line = _cubic_and_line(args, field)
    jr = smooth_restriction(Y, line)
    sd = splitting_from_quadrics(jr)
    sigma = connecting_sigma_from_quadrics(jr)
    components = sigma_splitting_components(sigma, sd, jr)
    gram = gram_from_quadrics(jr)
    return {
        "gram": gram.to_json(),
        "rank": gram.rank,
        "basis": _vectors_to_json(gram.basis),
        "non_generic": gram.non_generic,
        "splitting_type": sd.kind.value,
        "sigma": sigma.to_json(),
        "sigma_components": components.to_json(),
        "lagrangian_defects": [format_scalar(x) for x in lagrangian_defects(jr, components.splitting, sigma)],
    }


def cmd_sample(args, field) -> Dict:
    if args.cubic is not None:
        Y = cubic_from_json(_load_json(args.cubic))
        df = sample_lines_mod_p(Y, args.prime, limit=args.limit, workers=args.workers)
    else:
        df = sample_random_lines(args.count, args.seed, args.coeff_bound, args.prime, args.workers)
    summary = write_report(df, args.report) if args.report else summarize(df)
    return {"rows": records_to_json(df), "summary": records_to_json(summary)}


def cmd_pfaffian(args, field) -> Dict:
    if args.matrix is not None:
        M = skew_matrix_from_json(_load_json(args.matrix), field)
    else:
        M = generic_skew_linear_matrix(args.seed, args.coeff_bound, args.probe_prime)
        if field.characteristic:
            M = M.change_field(field)
    table = graded_cohomology_table(M, args.twists)
    return {
        "matrix": matrix_to_json(M),
        "pfaffian": _form_to_json(pfaffian(M)),
        "table": table_to_json(table),
        "euler_ok": bool(table["euler_ok"].all()),
        "vanishing_band": vanishing_band_holds(table),
    }


COMMANDS = {
    "verify-line": cmd_verify_line,
    "tangent": cmd_tangent,
    "splitting-type": cmd_splitting_type,
    "form": cmd_form,
    "sample": cmd_sample,
    "pfaffian": cmd_pfaffian,
}


def _error(e: Exception) -> Dict:
    return {"error": {"kind": type(e).__name__, "message": str(e)}}


def _warning_entries(caught, prime: Optional[int]) -> List[Dict[str, str]]:
    entries = []
    seen = set()
    if prime is not None:
        entries.append(
            {
                "category": PositiveCharacteristicWarning.__name__,
                "message": f"computed over GF({prime}); characteristic-0 statements are not certified",
            }
        )
    for w in caught:
        key = (w.category.__name__, str(w.message))
        if key not in seen:
            seen.add(key)
            entries.append({"category": key[0], "message": key[1]})
    return entries


def run(argv: Optional[List[str]] = None) -> Tuple[Dict, int]:
    """
    Parse arguments and execute one subcommand.

    Returns:
        (JSON document, exit code)
    """
    try:
        args = _parse_args(argv)
        field = make_field(args.prime) if getattr(args, "prime", None) is not None else make_field()
    except (UsageError, ValueError) as e:
        return _error(e), 1

    prime = getattr(args, "prime", None)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            doc = COMMANDS[args.command](args, field)
            code = 0
        except LineNotOnCubicError as e:
            doc, code = {"on_cubic": False, **_error(e)}, 2
        except GeometryError as e:
            doc, code = _error(e), 2
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, ZeroDivisionError, OSError) as e:
            doc, code = _error(e), 1
    doc["warnings"] = _warning_entries(caught, prime)
    return doc, code


def main(argv: Optional[List[str]] = None) -> int:
    doc, code = run(argv)
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
