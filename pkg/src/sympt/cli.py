"""``sympt`` command line: search, classify, table, oracle-check."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .campaign import CampaignConfig, run_campaign
from .reports import EXIT_PARSE_ERROR, classify_file, oracle_check, reproduce_rank_table
from .spectra import RankProfile
from .statefile import StateFileError
from .symcore import InvalidInputError

ORACLE_ATOL = 1e-10


def _profile(text: str) -> RankProfile:
    try:
        return RankProfile.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ranks, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sympt", description="PPT symmetric qubit states: ranks and extremal states")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run a campaign of extremal-state searches")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--target-ranks", type=_profile, default=None, metavar="a,b,c")
    p.add_argument("--full-descent", action="store_true",
                   help="keep lowering ranks past the candidate-entangled region")
    _common(p)

    p = sub.add_parser("classify", help="classify a saved state file")
    p.add_argument("path", type=Path)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true", help="print JSON instead of text")

    p = sub.add_parser("table", help="observed extremal rank profiles per N vs the reference rows")
    p.add_argument("--qubits", type=int, default=8, help="largest N")
    p.add_argument("--min-qubits", type=int, default=4)
    p.add_argument("--runs", type=int, default=50, help="runs per N")
    _common(p)

    p = sub.add_parser("oracle-check", help="compare compressed views with the full 2^N computation")
    p.add_argument("--qubits", type=int, default=8, help="largest N (<= 12)")
    p.add_argument("--states", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    return parser


def _search(args) -> int:
    cfg = CampaignConfig(args.qubits, args.runs, args.seed, args.tol, args.target_ranks, args.out,
                         args.jobs, stop_when_separable=not args.full_descent)
    rep = run_campaign(cfg)
    print(f"N={cfg.n_qubits} runs={cfg.runs} seed={cfg.seed}")
    print(f"extremal entangled fraction: {rep.extremal_entangled_fraction:.4f}")
    print("terminal profiles:")
    for prof, count in sorted(rep.profile_frequencies.items(), key=lambda kv: -kv[1]):
        ent = sum(1 for r in rep.entangled_records if r.terminal_profile == prof)
        print(f"  {str(prof):<32} {count:>6}  (extremal entangled: {ent})")
    if cfg.output_dir is not None:
        print(f"report written to {cfg.output_dir}")
    return 0


def _classify(args) -> int:
    try:
        rep = classify_file(args.path, args.tol)
    except StateFileError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    print(json.dumps(rep.to_json(), indent=2) if args.json else rep.text())
    return rep.exit_code


def _table(args) -> int:
    table = reproduce_rank_table(args.qubits, args.runs, args.seed, min_n=args.min_qubits,
                                 jobs=args.jobs, rank_tol=args.tol)
    print(table.text())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "rank_table.txt").write_text(table.text() + "\n")
        (args.out / "rank_table.json").write_text(json.dumps(table.to_json(), indent=2) + "\n")
    return 0 if table.ok else 1


def _oracle(args) -> int:
    rows = oracle_check(args.qubits, args.states, args.seed, args.tol)
    ok = True
    for r in rows:
        passed = r.passed(ORACLE_ATOL)
        ok &= passed
        print(f"N={r.n_qubits:<2} states={r.states} max|diff|={r.max_abs_error:.2e}"
              f" profile mismatches={r.profile_mismatches}  {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 1


COMMANDS = {"search": _search, "classify": _classify, "table": _table, "oracle-check": _oracle}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvalidInputError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2 if args.command != "classify" else EXIT_PARSE_ERROR
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 74


if __name__ == "__main__":
    sys.exit(main())
