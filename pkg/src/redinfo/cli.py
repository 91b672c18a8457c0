"""Command-line interface.

Exit codes: 0 ok, 2 input validation, 3 solver non-convergence, 4 I/O.
Every printed or written number is rounded half-even to 9 decimals.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dist import Alphabet, Joint3, joint_from_json, random_joint
from .errors import ConsistencyError, NonConvergence, ValidationError
from .infomeasures import i_min
from .pid import Diagnostics, decompose
from .projection import SolverConfig
from .transfer import PROCESSES, build_dice, build_example, decompose_transfer, expected_redundancy

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

SWEEP_COLUMNS = [
    "param", "total_mi", "i_red", "i_min", "unique_x", "unique_y",
    "synergy_red", "synergy_min", "site_red", "sdte_red", "site_min", "sdte_min",
]
RANDOM_COLUMNS = ["size", "i_min", "i_red"]
EXAMPLES = ("copy", "xor", "and", "rdnxor", "rdnunqxor", "xorand", "dice")
SWEEPS = ("copy", "dice", "process1", "process2", "process2reduced")


class SolverFailure(Exception):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    s = format(float(value), ".9f")
    return "0.000000000" if s == "-0.000000000" else s


@dataclass
class RunReport:
    inputs: dict
    measure_tag: str
    results: dict = field(default_factory=dict)  # measure tag -> PIDecomposition / TransferDecomposition
    diagnostics: Diagnostics = Diagnostics()
    wall_time: float = 0.0
    expected: float | None = None
    show_expected: bool = False

    def render(self) -> str:
        lines = ["inputs: " + ", ".join(f"{k}={v}" for k, v in self.inputs.items())]
        tags = list(self.results)
        first = next(iter(self.results.values()), None)
        if first is not None and hasattr(first, "site"):
            rows = [("transfer_entropy", "transfer_entropy"), ("site", "site"), ("sdte", "sdte")]
        else:
            rows = [(a, a) for a in ("redundant", "unique_x", "unique_y", "synergy", "total")]
        if self.show_expected:
            lines.append(f"{'expected':<18}{fmt(self.expected) if self.expected is not None else '-':>16}")
        lines.append(f"{'atom':<18}" + "".join(f"{t:>16}" for t in tags))
        for label, attr in rows:
            lines.append(f"{label:<18}" + "".join(f"{fmt(getattr(self.results[t], attr)):>16}" for t in tags))
        d = self.diagnostics
        lines.append(f"solver: max_kkt={d.max_kkt:.3e} max_iterations={d.max_iterations} converged={d.converged}")
        lines.append(f"wall_time: {self.wall_time:.3f}s")
        return "\n".join(lines)


def _config(args) -> SolverConfig:
    return SolverConfig(kkt_tol=args.tol_kkt, max_iters=args.max_iters)


def _measures(flag: str) -> list[str]:
    return {"red": ["I_red"], "min": ["I_min"], "both": ["I_red", "I_min"]}[flag]


def _merge(diags) -> Diagnostics:
    diags = list(diags)
    return Diagnostics(
        max((d.max_kkt for d in diags), default=0.0),
        max((d.max_iterations for d in diags), default=0),
        all(d.converged for d in diags),
    )


def _finish(report: RunReport) -> int:
    print(report.render())
    if not report.diagnostics.converged:
        raise SolverFailure("projection solver did not converge; see max_kkt above")
    return EXIT_OK


def cmd_decompose(args) -> int:
    t0 = time.perf_counter()
    j = joint_from_json(args.file)
    target = args.target.lower()
    if target not in "xyz" or len(target) != 1:
        raise ValidationError(f"target must be one of x, y, z; got {args.target!r}")
    j = j.permute("".join(a for a in "xyz" if a != target) + target)
    cfg = _config(args)
    results = {m: decompose(j, m, cfg) for m in _measures(args.measure)}
    report = RunReport(
        inputs={"file": args.file, "target": j.names[2], "sources": f"{j.names[0]},{j.names[1]}"},
        measure_tag=args.measure,
        results=results,
        diagnostics=_merge(r.diagnostics for r in results.values()),
    )
    report.wall_time = time.perf_counter() - t0
    return _finish(report)


def cmd_example(args) -> int:
    t0 = time.perf_counter()
    j = build_example(args.name, lam=args.lam, alpha=args.alpha)
    cfg = _config(args)
    results = {m: decompose(j, m, cfg) for m in _measures(args.measure)}
    inputs = {"example": args.name}
    if args.name in ("copy", "dice"):
        inputs["lambda"] = args.lam
    if args.name == "dice":
        inputs["alpha"] = args.alpha
    report = RunReport(
        inputs=inputs,
        measure_tag=args.measure,
        results=results,
        diagnostics=_merge(r.diagnostics for r in results.values()),
        expected=expected_redundancy(args.name, args.lam, args.alpha),
        show_expected=True,
    )
    report.wall_time = time.perf_counter() - t0
    return _finish(report)


def cmd_transfer(args) -> int:
    t0 = time.perf_counter()
    j = PROCESSES[args.process](args.d)
    cfg = _config(args)
    results = {m: decompose_transfer(j, m, cfg) for m in _measures(args.measure)}
    report = RunReport(
        inputs={"process": args.process, "d": args.d},
        measure_tag=args.measure,
        results=results,
        diagnostics=_merge(r.pid.diagnostics for r in results.values()),
    )
    report.wall_time = time.perf_counter() - t0
    return _finish(report)


def _sweep_row(task):
    process, param, lam, alpha, measures, cfg = task
    row = dict.fromkeys(SWEEP_COLUMNS)
    row["param"] = param
    if process in PROCESSES:
        j = PROCESSES[process](param)
        decs = {m: decompose_transfer(j, m, cfg) for m in measures}
        pids = {m: d.pid for m, d in decs.items()}
        for m, d in decs.items():
            suffix = "red" if m == "I_red" else "min"
            row[f"site_{suffix}"], row[f"sdte_{suffix}"] = d.site, d.sdte
    else:
        j = build_example("copy", lam=param) if process == "copy" else (
            build_dice(int(param), lam) if lam is not None else build_dice(alpha, param))
        pids = {m: decompose(j, m, cfg) for m in measures}
    any_pid = next(iter(pids.values()))
    row["total_mi"] = any_pid.total
    if "I_red" in pids:
        r = pids["I_red"]
        row.update(i_red=r.redundant, unique_x=r.unique_x, unique_y=r.unique_y, synergy_red=r.synergy)
    if "I_min" in pids:
        m = pids["I_min"]
        row.update(i_min=m.redundant, synergy_min=m.synergy)
        if "I_red" not in pids:
            row.update(unique_x=m.unique_x, unique_y=m.unique_y)
    return row, _merge(p.diagnostics for p in pids.values())


def _run_tasks(fn, tasks, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_sweep(args) -> int:
    if args.grid < 2:
        raise ValidationError("--grid must be at least 2")
    lam, alpha = None, args.alpha
    if args.process == "dice" and args.lam is not None:
        params, lam = [float(a) for a in range(1, 7)], args.lam
    else:
        params = np.linspace(0.0, 1.0, args.grid).tolist()
    cfg = _config(args)
    tasks = [(args.process, p, lam, alpha, _measures(args.measure), cfg) for p in params]
    results = _run_tasks(_sweep_row, tasks, args.jobs)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row, _ in results:
            w.writerow([fmt(row[c]) for c in SWEEP_COLUMNS])
    finally:
        if close:
            fh.close()
    diag = _merge(d for _, d in results)
    print(f"sweep {args.process}: {len(results)} rows, max_kkt={diag.max_kkt:.3e}", file=sys.stderr)
    if not diag.converged:
        raise SolverFailure("projection solver did not converge on some rows")
    return EXIT_OK


def _compare_row(task):
    size, probs, cfg = task
    j = Joint3(*(Alphabet.range(n) for n in probs.shape), probs)
    d = decompose(j, "I_red", cfg)
    return size, i_min(j), d.redundant, d.diagnostics


def random_ensemble(sizes, samples: int, seed: int):
    """Deterministic stream of (size, table) pairs with |X| = |Y| = 3."""
    rng = np.random.default_rng(seed)
    for size in sizes:
        for _ in range(samples):
            yield size, random_joint(rng, (3, 3, size)).probs


def cmd_random_compare(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes or any(s < 1 for s in sizes) or args.samples < 1:
        raise ValidationError("sizes and samples must be positive")
    cfg = _config(args)
    tasks = [(s, p, cfg) for s, p in random_ensemble(sizes, args.samples, args.seed)]
    rows = _run_tasks(_compare_row, tasks, args.jobs)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RANDOM_COLUMNS)
        for size, imin, ired, _ in rows:
            w.writerow([size, fmt(imin), fmt(ired)])
    finally:
        if close:
            fh.close()
    for size in sizes:
        sel = [(m, r) for s, m, r, _ in rows if s == size]
        imin = np.array([m for m, _ in sel])
        ired = np.array([r for _, r in sel])
        gap = imin - ired
        ratio = gap.mean() / ired.mean() if ired.mean() > 0 else float("inf")
        print(
            f"|Z|={size}: mean I_min={imin.mean():.6f} mean I_red={ired.mean():.6f} "
            f"mean gap={gap.mean():.6f} gap/I_red={ratio:.4f} frac(I_min>=I_red)={np.mean(gap >= -1e-9):.3f}",
            file=sys.stderr,
        )
    diag = _merge(d for *_, d in rows)
    if not diag.converged:
        raise SolverFailure("projection solver did not converge on some samples")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--measure", choices=("red", "min", "both"), default="both")
    common.add_argument("--tol-kkt", type=float, default=1e-8, dest="tol_kkt")
    common.add_argument("--max-iters", type=int, default=100_000, dest="max_iters")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps and ensembles")

    parser = argparse.ArgumentParser(prog="redinfo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="decompose a joint distribution from a JSON file")
    p.add_argument("file")
    p.add_argument("--target", default="z", help="which variable (x, y or z) is the target")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("example", parents=[common], help="decompose one of the built-in examples")
    p.add_argument("name", choices=EXAMPLES)
    p.add_argument("--lambda", type=float, default=0.0, dest="lam")
    p.add_argument("--alpha", type=int, default=1)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("transfer", parents=[common], help="decompose transfer entropy of an example process")
    p.add_argument("process", choices=sorted(PROCESSES))
    p.add_argument("--d", type=float, default=0.5)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep written as CSV")
    p.add_argument("process", choices=SWEEPS)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--lambda", type=float, default=None, dest="lam",
                   help="dice only: fix lambda and sweep alpha over 1..6")
    p.add_argument("--alpha", type=int, default=1, help="dice only: alpha used when sweeping lambda")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("random-compare", parents=[common], help="I_min vs I_red on random joints")
    p.add_argument("--sizes", default="2,4,6,8,20,40")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_random_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 2**64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverFailure, NonConvergence, ConsistencyError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
