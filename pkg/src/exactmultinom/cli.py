"""Command line interface: ``exactmultinom {infer,simulate,stability,bench}``.

``infer`` and ``stability`` read a JSON request::

    {"samples": [[7, 3]], "psi_name": "cell", "psi_params": {"index": 0},
     "psi_limits": [0, 1], "alpha": 0.05, "psi0": 0.5, "direction": "lower",
     "conf_int": true, "maxit": 50, "chunksize": 50, "seed": 0}

Exit codes: 0 success, 2 input error, 3 sample space above the cap.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from .core import Dataset, Direction, ExactMultinomError, InferenceConfig
from .engine import infer
from .psi import UnknownPsiError, registry_lookup
from .samplespace import DEFAULT_CAP, SpaceTooLargeError, enumerate_joint
from .simulation import (
    BENCH_COLUMNS,
    COVERAGE_COLUMNS,
    STABILITY_COLUMNS,
    bench,
    load_scenario,
    run_coverage,
    stability_traces,
)

EXIT_INPUT = 2
EXIT_CAP = 3


class RequestError(ExactMultinomError):
    def __init__(self, field_name, message):
        super().__init__(f"field {field_name!r}: {message}")
        self.field = field_name


@dataclass
class InferRequest:
    samples: list
    psi_name: str
    psi_limits: list
    psi_params: dict = field(default_factory=dict)
    alpha: float = 0.05
    psi0: Optional[float] = None
    direction: str = "lower"
    conf_int: bool = True
    maxit: int = 50
    chunksize: int = 50
    seed: int = 0
    threshold: Optional[float] = None

    @classmethod
    def from_dict(cls, doc) -> "InferRequest":
        if not isinstance(doc, dict):
            raise RequestError("<root>", "request must be a JSON object")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise RequestError(sorted(unknown)[0], "unknown field")
        for name in ("samples", "psi_name", "psi_limits"):
            if doc.get(name) is None:
                raise RequestError(name, "required")
        req = cls(**doc)
        req.validate()
        return req

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        s = self.samples
        if not isinstance(s, list) or not s or not all(isinstance(c, list) for c in s):
            raise RequestError("samples", "must be a non-empty list of count lists")
        for c in s:
            if len(c) < 2 or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in c):
                raise RequestError("samples", f"{c} is not a list of at least 2 non-negative integers")
            if sum(c) == 0:
                raise RequestError("samples", f"{c} has no observations")
        if not isinstance(self.psi_name, str):
            raise RequestError("psi_name", "must be a string")
        if not isinstance(self.psi_params, dict):
            raise RequestError("psi_params", "must be an object")
        lim = self.psi_limits
        if not (isinstance(lim, list) and len(lim) == 2 and all(_is_number(v) for v in lim) and lim[0] < lim[1]):
            raise RequestError("psi_limits", "must be [lower, upper] with lower < upper")
        if not (_is_number(self.alpha) and 0 < self.alpha < 1):
            raise RequestError("alpha", "must lie in (0, 1)")
        if self.psi0 is not None and not _is_number(self.psi0):
            raise RequestError("psi0", "must be a number or null")
        if self.direction not in ("lower", "upper"):
            raise RequestError("direction", "must be 'lower' or 'upper'")
        if not isinstance(self.conf_int, bool):
            raise RequestError("conf_int", "must be true or false")
        if not self.conf_int and self.psi0 is None:
            raise RequestError("psi0", "required when conf_int is false")
        for name in ("maxit", "chunksize"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise RequestError(name, "must be a positive integer")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise RequestError("seed", "must be an unsigned 64-bit integer")
        if self.threshold is not None and not (_is_number(self.threshold) or self.threshold == math.inf):
            raise RequestError("threshold", "must be a number, inf (never stop early) or null")

    def dataset(self) -> Dataset:
        return Dataset.from_counts(self.samples)

    def psi(self):
        dims = tuple(len(c) for c in self.samples)
        try:
            spec = registry_lookup(self.psi_name, dims=dims, **self.psi_params)
        except UnknownPsiError as exc:
            raise RequestError("psi_name", str(exc)) from None
        except ExactMultinomError as exc:
            raise RequestError("psi_params", str(exc)) from None
        return spec.with_limits(self.psi_limits)

    def config(self, workers=1) -> InferenceConfig:
        return InferenceConfig(
            alpha=self.alpha, psi0=self.psi0, direction=Direction(self.direction),
            maxit=self.maxit, chunksize=self.chunksize, early_stop_threshold=self.threshold,
            seed=self.seed, conf_int=self.conf_int, workers=workers,
        )


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def result_document(result, config: InferenceConfig, with_trace=False) -> dict:
    """JSON-ready result; ``p_value`` and ``conf_int`` appear only when computed."""
    doc = {"estimate": result.estimate}
    if result.conf_int is not None:
        doc["conf_int"] = list(result.conf_int)
    if result.p_value is not None:
        doc["p_value"] = result.p_value
        doc["diagnostics"] = {
            "B": config.B,
            "direction": config.direction.value,
            "iterations_used": result.iterations_used,
            "early_stopped": result.early_stopped,
            "null_hit": result.null_hit,
            "argmax_theta": None if result.argmax_theta is None else result.argmax_theta.tolist(),
        }
        if with_trace:
            doc["trace"] = [list(t) for t in result.trace]
    return doc


def _read_json(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise RequestError("--input", str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise RequestError("--input", f"invalid JSON: {exc}") from None


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    for name in ("seed", "alpha", "maxit", "chunksize", "threshold"):
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
    return doc


def _emit(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row if isinstance(row, dict) else dict(zip(columns, row)))
    return buf.getvalue()


def cmd_infer(args):
    doc = _read_json(args.input)
    req = InferRequest.from_dict(_apply_overrides(doc, args))
    config = req.config(workers=args.workers)
    psi = req.psi()
    data = req.dataset()
    enumerate_joint(data.shape, psi, args.cap)
    result = infer(data, psi, config, cap=args.cap)
    _emit(json.dumps(result_document(result, config, args.trace), indent=2) + "\n", args.output)


def cmd_stability(args):
    doc = dict(_read_json(args.input))
    psi0_list = doc.pop("psi0_list", None)
    if args.psi0_list:
        psi0_list = [float(v) for v in args.psi0_list.split(",")]
    if not psi0_list:
        raise RequestError("psi0_list", "required (in the request or via --psi0-list)")
    req = InferRequest.from_dict(_apply_overrides(doc, args))
    psi = req.psi()
    lo, hi = psi.psi_limits
    for v in psi0_list:
        if not _is_number(v) or not lo <= v <= hi:
            raise RequestError("psi0_list", f"{v} is outside psi_limits")
    data = req.dataset()
    enumerate_joint(data.shape, psi, args.cap)
    rows = stability_traces(data, psi, psi0_list, req.config())
    _emit(_csv(STABILITY_COLUMNS, rows), args.output)


def cmd_simulate(args):
    source = args.scenario or args.input
    if source is None:
        raise RequestError("--input", "give a scenario file or --scenario NAME")
    scenario = load_scenario(source)
    if args.seed is not None:
        scenario.seed = args.seed
    if args.alpha is not None:
        scenario.alpha = args.alpha
    for name in ("maxit", "chunksize"):
        if getattr(args, name) is not None:
            scenario.exact[name] = getattr(args, name)
    rows = run_coverage(scenario, workers=args.workers, replicates=args.replicates)
    _emit(_csv(COVERAGE_COLUMNS, [asdict(r) for r in rows]), args.output)


def _parse_grid(text):
    grid = []
    for item in text.split(";"):
        parts = item.split(",")
        if len(parts) != 3:
            raise RequestError("--grid", f"expected k,d,n triples separated by ';', got {item!r}")
        try:
            grid.append(tuple(int(p) for p in parts))
        except ValueError:
            raise RequestError("--grid", f"non-integer entry in {item!r}") from None
    return grid


def cmd_bench(args):
    grid = _parse_grid(args.grid)
    chunksize = args.chunksize or 50
    B = args.B if args.B is not None else (args.maxit or 50) * chunksize
    rows = bench(grid, B=B, runs=args.runs, chunksize=chunksize, seed=args.seed or 0, cap=args.cap)
    _emit(_csv(BENCH_COLUMNS, rows), args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exactmultinom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", default="-", help="JSON file, or - for stdin")
        p.add_argument("--output", default=None, help="output file (default stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--maxit", type=int, default=None)
        p.add_argument("--chunksize", type=int, default=None)
        p.add_argument("--threshold", type=float, default=None, help="early-stop threshold (default alpha/2 + 0.001)")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum joint sample space size")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("infer", help="estimate, confidence interval and p-value for one dataset")
    common(p)
    p.add_argument("--trace", action="store_true", help="include the running p-value trace")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", help="coverage simulation from a scenario file (CSV)")
    common(p)
    p.set_defaults(input=None)
    p.add_argument("--scenario", default=None, help="name of a bundled scenario")
    p.add_argument("--replicates", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stability", help="running p-value traces for several null values (CSV)")
    common(p)
    p.add_argument("--psi0-list", default=None, help="comma separated null values")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("bench", help="timing of enumeration and p-value computation (CSV)")
    common(p)
    p.add_argument("--grid", default="1,2,10;2,4,5;2,4,10;2,4,15", help="k,d,n triples separated by ';'")
    p.add_argument("--B", type=int, default=None, help="candidates per p-value (default maxit * chunksize)")
    p.add_argument("--runs", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SpaceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ExactMultinomError, UnknownPsiError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
