"""Command-line front end.

Example::

    irhlb --matrix well1850.mtx --tau 0 --k 3 --m 20 --output json --history hist.csv

Exit status: 0 converged, 2 not converged, 1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Sequence

from .driver import SolverConfig, SolverResult, solve
from .exceptions import MatrixMarketError
from .sparse import read_matrix_market

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="irhlb",
        description="Singular triplets of a sparse matrix nearest a target value "
                    "(implicitly restarted harmonic Lanczos bidiagonalization). "
                    "Use --tau 0 for the smallest singular triplets.",
    )
    parser.add_argument("--matrix", dest="matrix_path", required=True,
                        help="Matrix Market file (coordinate or array, real)")
    parser.add_argument("--tau", type=float, required=True, help="target value (>= 0)")
    parser.add_argument("--k", type=int, required=True, help="number of triplets wanted")
    parser.add_argument("--m", type=int, required=True, help="maximum subspace dimension")
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--max-restarts", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", dest="output_format", choices=("json", "csv", "table"),
                        default="table")
    parser.add_argument("--history", dest="history_path", default=None,
                        help="write per-restart residual estimates as CSV")
    parser.add_argument("--verbose", "-v", action="store_true")
    return parser


def fmt(x: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def render_json(result: SolverResult) -> str:
    s = result.stats
    payload = {
        "sigma": [t.sigma for t in result.triplets],
        "residual": [t.residual for t in result.triplets],
        "iter": s.restarts,
        "mv": s.matvecs,
        "time_sec": s.wall_seconds,
        "stopcrit": s.stopcrit if math.isfinite(s.stopcrit) else None,
        "converged": result.converged,
    }
    return json.dumps(payload, indent=2) + "\n"


def render_csv(result: SolverResult) -> str:
    s = result.stats
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["index", "sigma", "residual"])
    for i, t in enumerate(result.triplets, start=1):
        w.writerow([i, fmt(t.sigma), fmt(t.residual)])
    w.writerow([])
    w.writerow(["iter", "time_sec", "mv", "stopcrit", "converged"])
    w.writerow([s.restarts, fmt(s.wall_seconds), s.matvecs, fmt(s.stopcrit),
                "true" if result.converged else "false"])
    return out.getvalue()


def render_table(result: SolverResult) -> str:
    s = result.stats
    lines = [f"{'index':>5}  {'sigma':>24}  {'residual':>24}"]
    for i, t in enumerate(result.triplets, start=1):
        lines.append(f"{i:>5}  {fmt(t.sigma):>24}  {fmt(t.residual):>24}")
    lines.append("")
    lines.append(f"iter={s.restarts}  mv={s.matvecs}  time_sec={s.wall_seconds:.3f}  "
                 f"stopcrit={fmt(s.stopcrit)}  converged={str(result.converged).lower()}")
    lines.append("note: mv counts products with A only, including the final residual checks")
    return "\n".join(lines) + "\n"


def write_history(path: str, result: SolverResult, k: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["restart"] + [f"eps_{i}" for i in range(1, k + 1)])
        for r, row in enumerate(result.stats.residual_history):
            w.writerow([r] + [fmt(x) for x in row])


RENDERERS = {"json": render_json, "csv": render_csv, "table": render_table}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        config = SolverConfig(tau=args.tau, k=args.k, m=args.m, tol=args.tol,
                              max_restarts=args.max_restarts, seed=args.seed,
                              verbose=args.verbose)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"irhlb: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        A = read_matrix_market(args.matrix_path)
    except OSError as exc:
        print(f"irhlb: error: cannot read matrix file {args.matrix_path!r}: {exc.strerror or exc}",
              file=sys.stderr)
        return EXIT_INPUT_ERROR
    except MatrixMarketError as exc:
        print(f"irhlb: error: invalid matrix file {args.matrix_path!r}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        result = solve(A, config)
    except ValueError as exc:
        print(f"irhlb: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    sys.stdout.write(RENDERERS[args.output_format](result))
    if args.history_path:
        try:
            write_history(args.history_path, result, config.k)
        except OSError as exc:
            print(f"irhlb: error: cannot write history {args.history_path!r}: {exc}",
                  file=sys.stderr)
            return EXIT_INPUT_ERROR
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
