"""Command-line interface.

Exit status: 0 success, 1 verification failure, 2 parse or usage error,
3 resource limit.  All numbers are printed as exact rationals.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import errors
from .amalgam import AmalgamSpec, amalgamate
from .approx import NormOracle, approximate_report, rationalize
from .embed import embed_group, format_report, verify_embedding
from .fraisse import new_chain, save, service
from .katetov import KatetovFn, katetov_extend
from .suites import SUITES
from .textio import Lines, ball_tsv, parse_katetov, parse_metric, parse_oracle_table, write_metric
from .vectors import LatticeVector, format_rational, parse_rational
from .wordmetric import (
    FinGenMetric,
    ball,
    d_distance_ball,
    evaluate,
    stable_norm_lp,
    stable_norm_upper,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

_USAGE_ERRORS = (
    errors.ParseError,
    errors.ZeroWeightNonzeroVector,
    errors.NotSpanning,
    errors.RankMismatch,
    errors.OracleDomainError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise errors.ParseError(f"cannot read {path}: {exc.strerror}") from None


def load_metric(path: str) -> FinGenMetric:
    return parse_metric(_read(path))


def load_oracle(path: str) -> NormOracle:
    """An oracle file is either a ``metric v1`` file or an ``oracle v1`` table."""
    text = _read(path)
    first = Lines(text).peek()
    if first is not None and first[1][:1] == ["oracle"]:
        rank, table = parse_oracle_table(text)
        return NormOracle.from_table(rank, table, Path(path).name)
    return NormOracle.from_metric(parse_metric(text), Path(path).name)


def _vector(m_rank: int, coords: Sequence[int]) -> LatticeVector:
    if len(coords) != m_rank:
        raise errors.RankMismatch(f"expected {m_rank} coordinates, got {len(coords)}")
    return LatticeVector.from_dense(coords)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- subcommands -------------------------------------------------------------------


def cmd_eval(a) -> int:
    m = load_metric(a.metric)
    print(format_rational(evaluate(m, _vector(m.rank, a.x))))
    return EXIT_OK


def cmd_ball(a) -> int:
    m = load_metric(a.metric)
    entries = sorted(ball(m, a.radius).items(), key=lambda kv: (kv[1], kv[0].sort_key()))
    _emit("".join(line + "\n" for line in ball_tsv(m.rank, entries)), a.out)
    return EXIT_OK


def cmd_dist(a) -> int:
    print(format_rational(d_distance_ball(load_metric(a.a), load_metric(a.b), a.R)))
    return EXIT_OK


def cmd_stable_norm(a) -> int:
    m = load_metric(a.metric)
    x = _vector(m.rank, a.x)
    est = stable_norm_upper(m, x, a.N)
    print(f"lp {format_rational(stable_norm_lp(m, x))}")
    print(f"upper {format_rational(est.value_upper)} N {a.N}")
    return EXIT_OK


def cmd_extend_katetov(a) -> int:
    base_dir = Path(a.katetov).parent
    _, values, base = parse_katetov(_read(a.katetov), lambda p: load_metric(str(base_dir / p)))
    ext = katetov_extend(KatetovFn(base, values), a.radius)
    _emit(write_metric(ext), a.out)
    return EXIT_OK


def cmd_amalgamate(a) -> int:
    spec = AmalgamSpec(a.shared, load_metric(a.left), load_metric(a.right))
    _emit(write_metric(amalgamate(spec, a.radius)), a.out)
    return EXIT_OK


def cmd_build(a) -> int:
    seed = load_metric(a.seed_metric) if a.seed_metric else None
    c, log = service(new_chain(seed), a.bound, radius=a.radius, rounds=a.rounds)
    _emit(save(c), a.out)
    print(f"stages {len(c.stages)} rank {c.last.rank} ran {len(log.ran)} skipped {len(log.skipped)}", file=sys.stderr)
    return EXIT_OK


def cmd_check(a) -> int:
    report = SUITES[a.module](a.seed) if a.count is None else SUITES[a.module](a.seed, a.count)
    for failure in report.failures:
        print(f"FAIL {failure}")
    status = "ok" if report.ok else "failed"
    print(f"{report.module} seed {report.seed}: {report.checks} checks, {len(report.failures)} failures, {status}")
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_approximate(a) -> int:
    p = load_oracle(a.oracle)
    res = approximate_report(p, a.eps, radius=a.radius, retries=a.retries)
    _emit(write_metric(res.metric), a.out)
    print(f"ratio {format_rational(res.worst_ratio)} eps {format_rational(a.eps)} radius {a.radius}", file=sys.stderr)
    return EXIT_OK


def cmd_rationalize(a) -> int:
    _emit(write_metric(rationalize(load_metric(a.metric), a.eps)), a.out)
    return EXIT_OK


def cmd_embed(a) -> int:
    p = load_oracle(a.oracle)
    _, rep = embed_group(p, a.depth, radius=a.radius)
    err = verify_embedding(rep, p, a.radius)
    _emit(format_report(rep), a.out)
    if err > rep.bound:
        print(f"error {format_rational(err)} exceeds bound {format_rational(rep.bound)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="univgroup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="norm of a vector")
    s.add_argument("-m", "--metric", required=True)
    s.add_argument("-x", type=int, nargs="+", required=True)
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("ball", help="ball as TSV")
    s.add_argument("-m", "--metric", required=True)
    s.add_argument("-r", "--radius", type=_rational, required=True)
    s.add_argument("--out")
    s.set_defaults(run=cmd_ball)

    s = sub.add_parser("dist", help="D-distance lower bound on an l1 ball")
    s.add_argument("-a", required=True)
    s.add_argument("-b", required=True)
    s.add_argument("-R", type=int, required=True)
    s.set_defaults(run=cmd_dist)

    s = sub.add_parser("stable-norm", help="stable norm by LP and by sampled multiples")
    s.add_argument("-m", "--metric", required=True)
    s.add_argument("-x", type=int, nargs="+", required=True)
    s.add_argument("-N", type=int, default=8)
    s.set_defaults(run=cmd_stable_norm)

    s = sub.add_parser("extend-katetov", help="one-point extension from a katetov v1 file")
    s.add_argument("-k", "--katetov", required=True)
    s.add_argument("--radius", type=_rational)
    s.add_argument("--out")
    s.set_defaults(run=cmd_extend_katetov)

    s = sub.add_parser("amalgamate", help="amalgam of two metrics over a shared initial block")
    s.add_argument("-l", "--left", required=True)
    s.add_argument("-r", "--right", required=True)
    s.add_argument("--shared", type=int, required=True)
    s.add_argument("--radius", type=_rational)
    s.add_argument("--out")
    s.set_defaults(run=cmd_amalgamate)

    s = sub.add_parser("build", help="chain servicing every Katětov task within a bound")
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("--seed-metric")
    s.add_argument("--radius", type=_rational)
    s.add_argument("--rounds", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(run=cmd_build)

    s = sub.add_parser("check", help="seeded verification suite of one module")
    s.add_argument("module", choices=sorted(SUITES))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int)
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("approximate", help="finitely generated approximation of an oracle norm")
    s.add_argument("--oracle", required=True)
    s.add_argument("--eps", type=_rational, required=True)
    s.add_argument("--radius", type=int, default=8)
    s.add_argument("--retries", type=int, default=3)
    s.add_argument("--out")
    s.set_defaults(run=cmd_approximate)

    s = sub.add_parser("rationalize", help="raise weights within eps |x|_1")
    s.add_argument("-m", "--metric", required=True)
    s.add_argument("--eps", type=_rational, required=True)
    s.add_argument("--out")
    s.set_defaults(run=cmd_rationalize)

    s = sub.add_parser("embed", help="staged embedding of an oracle norm on Z^n")
    s.add_argument("--oracle", required=True)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--radius", type=int, default=4)
    s.add_argument("--out")
    s.set_defaults(run=cmd_embed)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except errors.ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (errors.UnivGroupError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY if isinstance(exc, errors.UnivGroupError) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
