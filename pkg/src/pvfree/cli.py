"""Command-line entry point: schemes, multiplier tables, free energies and checks."""

import argparse
import contextlib
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from ._format import fmt_float
from .errors import DomainError, FieldFormatError, InfeasibleCutoffError, PVFreeError
from .pv_scheme import PauliVillarsScheme, default_scheme, scheme_from_cutoff, scheme_from_masses
from .quadrature import DEFAULT_SPEC

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


@dataclass
class CommandOutcome:
    exit_code: int
    artifacts: list = field(default_factory=list)
    summary: str = ""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    p = _Parser(prog="pvfree", description="Pauli-Villars regularised vacuum free energy")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("scheme", help="build a regularisation scheme")
    s.add_argument("--m0", type=float, required=True)
    s.add_argument("--m1", type=float)
    s.add_argument("--m2", type=float)
    s.add_argument("--cutoff", type=float)
    s.add_argument("--ratio", type=float, default=2.0)
    s.add_argument("--json", dest="json_path")

    t = sub.add_parser("table", help="tabulate multipliers on a k grid")
    t.add_argument("--quantity", choices=("m0", "mt", "gamma", "all"), default="all")
    t.add_argument("--beta", type=float, required=True)
    t.add_argument("--k-min", type=float, required=True)
    t.add_argument("--k-max", type=float, required=True)
    t.add_argument("--samples", type=int, required=True)
    t.add_argument("--log-k", action="store_true")
    t.add_argument("--scheme-file")
    t.add_argument("--tol", type=float)
    t.add_argument("--out", required=True)

    e = sub.add_parser("energy", help="quadratic free energy of a field document")
    e.add_argument("--field", required=True)
    e.add_argument("--beta", type=float, required=True)
    e.add_argument("--scheme-file")
    e.add_argument("--kappa", type=float, default=1.0)
    e.add_argument("--tol", type=float)
    e.add_argument("--max-nodes", type=int, default=512)
    e.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITE_CHOICES, default="all")
    v.add_argument("--tol", type=float)

    u = sub.add_parser("uehling", help="evaluate the Uehling function")
    u.add_argument("--k", type=float, required=True)
    return p


def _spec(tol):
    if tol is None:
        return DEFAULT_SPEC
    if not tol > 0:
        raise DomainError("--tol must be positive")
    return DEFAULT_SPEC.replace(rel_tol=tol)


def _load_scheme(path):
    if path is None:
        return default_scheme()
    with open(path, encoding="utf-8") as fh:
        return PauliVillarsScheme.from_json(fh.read())


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _cmd_scheme(args, out):
    if args.cutoff is not None:
        if args.m1 is not None or args.m2 is not None:
            raise _UsageError("give either --m1/--m2 or --cutoff, not both")
        scheme = scheme_from_cutoff(args.m0, args.cutoff, args.ratio)
    else:
        if args.m1 is None or args.m2 is None:
            raise _UsageError("scheme needs --m1 and --m2, or --cutoff")
        scheme = scheme_from_masses(args.m0, args.m1, args.m2)
    text = scheme.to_json()
    artifacts = []
    if args.json_path:
        artifacts.append(_write(args.json_path, text))
    out.write(text)
    return CommandOutcome(EXIT_OK, artifacts, f"scheme with cutoff {fmt_float(scheme.cutoff)}")


def _cmd_table(args, out):
    from .multipliers import build_table

    if args.samples < 1:
        raise DomainError("--samples must be at least 1")
    if not args.k_max >= args.k_min >= 0:
        raise DomainError("need 0 <= k-min <= k-max")
    if args.samples > 1 and args.k_max == args.k_min:
        raise DomainError("k-min equals k-max with more than one sample")
    if args.log_k:
        if args.k_min <= 0:
            raise DomainError("--log-k needs k-min > 0")
        ks = np.geomspace(args.k_min, args.k_max, args.samples)
    else:
        ks = np.linspace(args.k_min, args.k_max, args.samples)
    quantities = ("m0", "mt", "gamma") if args.quantity == "all" else (args.quantity,)
    table = build_table(_load_scheme(args.scheme_file), args.beta, ks, _spec(args.tol),
                        quantities, "log" if args.log_k else "linear")
    path = _write(args.out, table.to_csv())
    return CommandOutcome(EXIT_OK, [path], f"wrote {len(table.samples)} rows to {path}")


def _cmd_energy(args, out):
    from .fields import coulomb_project, load_grid_field, spectral_transform
    from .free_energy import quadratic_free_energy

    with open(args.field, "rb") as fh:
        grid = load_grid_field(fh.read())
    spectral = coulomb_project(spectral_transform(grid))
    report = quadratic_free_energy(spectral, args.beta, _load_scheme(args.scheme_file),
                                   _spec(args.tol), kappa=args.kappa, max_nodes=args.max_nodes)
    path = _write(args.out, report.to_json())
    return CommandOutcome(EXIT_OK, [path], f"F2 = {fmt_float(report.f2_total)}")


def _cmd_uehling(args, out):
    from .multipliers import uehling

    value = uehling(args.k)
    out.write(fmt_float(value) + "\n")
    return CommandOutcome(EXIT_OK, [], f"U({fmt_float(args.k)}) = {fmt_float(value)}")


def _cmd_verify(args, out):
    from .checks import SUITES, run_suites

    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, _spec(args.tol), out)
    failures = [r for r in results if not r.passed]
    if failures:
        out.write(json.dumps({"failures": [r.as_dict() for r in failures]}, sort_keys=True) + "\n")
        return CommandOutcome(EXIT_VERIFY_FAILED, [],
                              f"{len(failures)} of {len(results)} checks failed")
    return CommandOutcome(EXIT_OK, [], f"all {len(results)} checks passed")


SUITE_CHOICES = ("pv", "theta", "bessel", "fermi", "quadrature", "uehling", "multipliers",
                 "gamma-oracle", "multiplier-oracle", "fields", "free-energy", "all")

_COMMANDS = {"scheme": _cmd_scheme, "table": _cmd_table, "energy": _cmd_energy,
             "verify": _cmd_verify, "uehling": _cmd_uehling}


def execute_command(argv, stdout=None, stderr=None):
    """Run one command line and report its exit code, written files and a summary."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        if not argv:
            raise _UsageError(parser.format_usage() + "pvfree: error: a command is required")
        help_text = io.StringIO()
        try:
            with contextlib.redirect_stdout(help_text):
                args = parser.parse_args(list(argv))
        except SystemExit as exc:
            out.write(help_text.getvalue())
            code = EXIT_OK if not exc.code else EXIT_USAGE
            return CommandOutcome(code, [], "help shown")
        if args.command is None:
            raise _UsageError(parser.format_usage() + "pvfree: error: a command is required")
        return _COMMANDS[args.command](args, out)
    except _UsageError as exc:
        text = str(exc)
        if "usage:" not in text:
            text = f"{parser.format_usage()}pvfree: error: {text}"
        err.write(f"{text}\n")
        return CommandOutcome(EXIT_USAGE, [], "usage error")
    except (DomainError, InfeasibleCutoffError, FieldFormatError, OSError) as exc:
        err.write(f"pvfree: input error: {exc}\n")
        return CommandOutcome(EXIT_USAGE, [], f"input error: {exc}")
    except (PVFreeError, ArithmeticError) as exc:
        err.write(f"pvfree: numerical failure: {exc}\n")
        return CommandOutcome(EXIT_RUNTIME, [], f"numerical failure: {exc}")


def main(argv=None):
    outcome = execute_command(sys.argv[1:] if argv is None else argv)
    if outcome.exit_code == EXIT_OK and outcome.summary:
        print(outcome.summary, file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
