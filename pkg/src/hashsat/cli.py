"""Command-line entry point: ``hashsat <command> [options] FILE``.

Exit codes: 0 success, 1 usage, 2 parse error, 3 resource limit or sampler/counter failure.
Reports go to stdout; diagnostics and timings go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import secrets
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hashsat import __version__
from hashsat.counter import AllRoundsFailed, approx_count
from hashsat.formula import CnfFormula, DimacsError, literals_line, parse_dimacs
from hashsat.indsupport import NotIndependent, minimize_support
from hashsat.oracle import TooLarge, exact_count, exact_solutions, exact_tilt, exact_uniform_sample, exact_weighted_count, uniformity_report
from hashsat.sampler import DEFAULT_EPSILON, FailureBudgetExhausted, Unsatisfiable, parallel_sample, unigen_sample
from hashsat.weighted import DEFAULT_PRECISION, parse_weights, reduce_wmc_to_umc, tilt_bound, weighted_count, weighted_sample

log = logging.getLogger("hashsat")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input_path: str
    epsilon: float | None = None
    delta: float = 0.2
    num_samples: int = 100
    seed: int | None = None
    workers: int = 1
    streams: int | None = None
    use_mis: bool = False
    dyadic_precision: int = DEFAULT_PRECISION
    output_format: str = "json"
    mode: str = "single"
    cap: int = 20

    @classmethod
    def from_args(cls, a: argparse.Namespace) -> RunConfig:
        return cls(
            command=a.command,
            input_path=a.file,
            epsilon=getattr(a, "epsilon", None),
            delta=getattr(a, "delta", 0.2),
            num_samples=getattr(a, "samples", 100),
            seed=a.seed if a.seed is not None else secrets.randbits(32),
            workers=getattr(a, "workers", 1),
            streams=getattr(a, "streams", None),
            use_mis=getattr(a, "use_mis", False),
            dyadic_precision=getattr(a, "precision", DEFAULT_PRECISION),
            output_format=a.format,
            mode=getattr(a, "mode", "single"),
            cap=getattr(a, "cap", 20),
        )


def _fraction(x) -> str | None:
    if isinstance(x, float) and math.isinf(x):
        return None
    return str(Fraction(x))


def _read(path: str) -> CnfFormula:
    data = sys.stdin.buffer.read() if path == "-" else open(path, "rb").read()
    return parse_dimacs(data)


def _sampling_set(cfg: RunConfig, f: CnfFormula) -> tuple[int, ...]:
    if not cfg.use_mis:
        return f.projection_set()
    try:
        return minimize_support(f, f.sampling_set)
    except NotIndependent:
        raise UsageError("--use-mis: the annotated sampling set is not an independent support") from None


def cmd_count(cfg: RunConfig, f: CnfFormula) -> dict:
    s = _sampling_set(cfg, f)
    est = approx_count(f, s, cfg.epsilon, cfg.delta, np.random.default_rng(cfg.seed))
    return {**est.to_dict(), "sampling_set": list(s)}


def cmd_sample(cfg: RunConfig, f: CnfFormula) -> dict:
    s = _sampling_set(cfg, f)
    batch = parallel_sample(f, s, cfg.epsilon, cfg.num_samples, cfg.workers, cfg.seed, cfg.mode, cfg.streams)
    return {
        **batch.to_dict(),
        "epsilon": cfg.epsilon,
        "workers": cfg.workers,
        "streams": cfg.streams or cfg.workers,
        "sampling_set": list(s),
        "witnesses": [list(w) for w in batch.witnesses],
    }


def cmd_mis(cfg: RunConfig, f: CnfFormula) -> dict:
    support = minimize_support(f, f.sampling_set)
    return {"support": list(support), "size": len(support), "dimacs": "c ind " + literals_line(support)}


def cmd_wcount(cfg: RunConfig, f: CnfFormula) -> dict:
    w = parse_weights(f, cfg.dyadic_precision)
    est = weighted_count(w, cfg.epsilon, cfg.delta, np.random.default_rng(cfg.seed))
    return {**est.to_dict(), "rounding_error": _fraction(w.rounding_error), "tilt_bound": _fraction(tilt_bound(w))}


def cmd_wsample(cfg: RunConfig, f: CnfFormula) -> dict:
    w = parse_weights(f, cfg.dyadic_precision)
    batch = weighted_sample(w, cfg.epsilon, cfg.num_samples, np.random.default_rng(cfg.seed), cfg.mode)
    return {
        **batch.to_dict(),
        "epsilon": cfg.epsilon,
        "scale_log2": reduce_wmc_to_umc(w).scale_log2,
        "rounding_error": _fraction(w.rounding_error),
        "witnesses": [list(x) for x in batch.witnesses],
    }


def cmd_exact(cfg: RunConfig, f: CnfFormula) -> dict:
    out: dict = {"count": exact_count(f, None, cfg.cap), "sampling_set": list(f.projection_set())}
    if f.weight_lines():
        w = parse_weights(f, cfg.dyadic_precision)
        wc = exact_weighted_count(w, cfg.cap)
        out.update(weighted_count=str(wc), weighted_float=float(wc), tilt=_fraction(exact_tilt(w, cfg.cap)) if wc else None)
    return out


def cmd_validate(cfg: RunConfig, f: CnfFormula) -> dict:
    s = f.projection_set()
    reference = exact_solutions(f, s, cfg.cap)
    if not reference:
        raise Unsatisfiable("formula has no solutions")
    n = cfg.num_samples if cfg.num_samples else 100 * len(reference)
    rng = np.random.default_rng(cfg.seed)
    batch = unigen_sample(f, s, cfg.epsilon, n, rng, cfg.mode)
    ideal = exact_uniform_sample(f, s, rng, len(batch.witnesses), cfg.cap)
    rep = uniformity_report(batch.witnesses, reference, ideal)
    return {**rep.to_dict(), "epsilon": cfg.epsilon, "rejected_at_0.01": rep.rejects(0.01)}


COMMANDS = {
    "count": cmd_count,
    "sample": cmd_sample,
    "mis": cmd_mis,
    "wcount": cmd_wcount,
    "wsample": cmd_wsample,
    "exact": cmd_exact,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hashsat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("file", help="DIMACS CNF file, or - for stdin")
        sp.add_argument("--seed", type=int, help="RNG seed (random and reported when omitted)")
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("-v", "--verbose", action="store_true")

    for name, eps in (("count", 0.8), ("wcount", 0.8)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--epsilon", type=float, default=eps)
        sp.add_argument("--delta", type=float, default=0.2)
        if name == "count":
            sp.add_argument("--use-mis", action="store_true", help="hash over a minimized independent support")
        else:
            sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="dyadic weight bits")

    for name in ("sample", "wsample", "validate"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
        sp.add_argument("--samples", type=int, default=0 if name == "validate" else 100)
        sp.add_argument("--mode", choices=("single", "multi"), default="single")
        if name == "sample":
            sp.add_argument("--workers", type=int, default=1)
            sp.add_argument("--streams", type=int, help="seeded sampling streams (default: workers)")
            sp.add_argument("--use-mis", action="store_true")
        if name == "wsample":
            sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
        if name == "validate":
            sp.add_argument("--cap", type=int, default=20)

    sp = sub.add_parser("mis")
    common(sp)
    sp = sub.add_parser("exact")
    common(sp)
    sp.add_argument("--cap", type=int, default=20)
    sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    return p


def _render_text(report: dict) -> str:
    lines = []
    witnesses = report.pop("witnesses", None)
    for k, v in report.items():
        if k in ("histogram", "rounds", "cells"):
            continue
        lines.append(f"c {k} = {json.dumps(v)}")
    if report["command"] == "mis":
        lines.append(report["dimacs"])
    if report["command"] in ("count", "wcount"):
        lines.append(f"s mc {report['value']}")
    for w in witnesses or ():
        lines.append("v " + literals_line(w))
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="c %(message)s")
    cfg = RunConfig.from_args(args)
    try:
        if cfg.num_samples < 0 or (cfg.command in ("sample", "wsample") and cfg.num_samples < 1):
            raise UsageError("--samples must be positive")
        if cfg.workers < 1 or (cfg.streams is not None and cfg.streams < 1):
            raise UsageError("--workers and --streams must be positive")
        f = _read(cfg.input_path)
        t0 = time.perf_counter()
        body = COMMANDS[cfg.command](cfg, f)
        log.info("%s took %.3f s", cfg.command, time.perf_counter() - t0)
    except (DimacsError, OSError) as e:
        print(f"hashsat: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, NotIndependent) as e:
        print(f"hashsat: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FailureBudgetExhausted, AllRoundsFailed, TooLarge, Unsatisfiable) as e:
        print(f"hashsat: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"hashsat: {e}", file=sys.stderr)
        return EXIT_USAGE
    report = {"command": cfg.command, "version": __version__, "seed": cfg.seed, "input": cfg.input_path, **body}
    if cfg.output_format == "json":
        sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    else:
        sys.stdout.write(_render_text(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
