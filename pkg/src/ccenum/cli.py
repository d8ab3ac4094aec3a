"""Command-line interface: ``ccenum {bounds,enumerate,collinear,sweep,fewnomial,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
Reports go to stdout (or ``--output``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .bounds import bounds_report
from .classify import make_class, same_class
from .fewnomial import build_system
from .geometry import PotentialParams
from .records import RecordError, audit_record, class_record, fmt_real, records_to_csv
from .solver import (
    SolverSettings,
    canonical_orderings,
    default_workers,
    multistart,
    solve_collinear,
    sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int
    alpha: float
    masses: tuple[float, ...]
    settings: SolverSettings
    output: str | None = None
    format: str = "json"

    @property
    def params(self) -> PotentialParams:
        return PotentialParams(self.alpha, self.masses)

    def to_json(self) -> dict:
        # worker count is deliberately absent: it never changes results
        return {
            "n": self.n,
            "alpha": fmt_real(self.alpha),
            "masses": [fmt_real(m) for m in self.masses],
            "settings": self.settings.to_json(),
        }


_SETTING_KEYS = (
    "starts",
    "seed",
    "tol_residual",
    "max_iters",
    "min_separation",
    "max_radius",
    "annulus",
    "damping_init",
)


def _parse_masses(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        return [float(t) for t in items]
    except (TypeError, ValueError):
        raise UsageError(f"cannot parse masses {text!r}") from None


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: top level must be an object")
    raw = dict(raw.get("run_config", raw))
    raw.update(raw.pop("settings", {}) or {})
    return raw


def build_run_config(args) -> RunConfig:
    cfg: dict = {}
    if getattr(args, "config", None):
        cfg = _load_config_file(args.config)
    for key in ("n", "alpha", "masses", "output", "format") + _SETTING_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if "n" not in cfg and "masses" not in cfg:
        raise UsageError("need --n or --masses")
    masses = _parse_masses(cfg["masses"]) if "masses" in cfg else None
    try:
        n = int(cfg["n"]) if "n" in cfg else len(masses)
    except (TypeError, ValueError):
        raise UsageError(f"invalid n: {cfg['n']!r}") from None
    if n < 2:
        raise UsageError("n must be >= 2")
    if masses is None:
        masses = [1.0] * n
    if len(masses) != n:
        raise UsageError(f"got {len(masses)} masses for n={n}")
    alpha = float(cfg.get("alpha", 1.0))
    try:
        PotentialParams(alpha, masses)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kwargs = {}
    for key in _SETTING_KEYS:
        if key in cfg:
            v = cfg[key]
            if key == "annulus":
                kwargs[key] = tuple(float(x) for x in v)
            elif key in ("starts", "seed", "max_iters"):
                kwargs[key] = int(v)
            else:
                kwargs[key] = float(v)
    try:
        settings = SolverSettings(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fmt = cfg.get("format") or "json"
    if fmt not in ("json", "csv", "text"):
        raise UsageError(f"unknown format {fmt!r}")
    return RunConfig(n, alpha, tuple(masses), settings, cfg.get("output"), fmt)


def _workers(args) -> int:
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    try:
        return default_workers()
    except ValueError:
        raise UsageError("CCENUM_THREADS must be an integer") from None


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


# --- commands -----------------------------------------------------------------


def cmd_bounds(args) -> int:
    if args.n is None or args.n < 2:
        raise UsageError("n must be >= 2")
    report = bounds_report(args.n)
    if args.json or args.format == "json":
        _emit(json.dumps(report.to_json(), separators=(",", ":")) + "\n", None)
    elif args.format == "csv":
        _emit(f"n,upper,lower,poincare\n{report.n},{report.upper},{report.lower},"
              f"\"{' '.join(map(str, report.poincare))}\"\n", None)
    else:
        _emit(
            f"n={report.n}\nupper={report.upper}\nlower={report.lower}\n"
            f"poincare={' '.join(map(str, report.poincare))}\n",
            None,
        )
    return EXIT_OK


def cmd_enumerate(args) -> int:
    rc = build_run_config(args)
    result = multistart(rc.params, rc.settings, _workers(args))
    report = bounds_report(rc.n)
    records = [class_record(c) for c in result.classes]
    nondeg = sum(1 for c in result.classes if c.nondegenerate)
    within = report.lower <= nondeg <= report.upper
    summary = (
        f"classes={len(records)} nondegenerate={nondeg} within_bounds={str(within).lower()}"
    )
    if rc.format == "json":
        doc = {
            "run_config": rc.to_json(),
            "bounds": report.to_json(),
            "summary": {
                "classes": len(records),
                "nondegenerate": nondeg,
                "collinear": sum(1 for c in result.classes if c.collinear),
                "within_bounds": within,
                "converged_starts": result.converged,
                "failures": result.failures,
            },
            "classes": records,
        }
        _emit(_dump(doc), rc.output)
    elif rc.format == "csv":
        _emit(records_to_csv(records), rc.output)
    else:
        lines = ["id orient collinear kernel full_index reduced_index nondegenerate hits distances"]
        for c in result.classes:
            lines.append(
                f"{c.id} {c.orientation:+d} {str(c.collinear).lower()} {c.kernel_dim} {c.full_index} "
                f"{c.reduced_index if c.reduced_index is not None else '-'} "
                f"{str(c.nondegenerate).lower()} {c.hits} "
                + " ".join(f"{d:.10f}" for d in c.fingerprint.distances)
            )
        _emit("\n".join(lines) + "\n", rc.output)
    # keep stdout parseable when the report itself goes there
    print(summary, file=sys.stdout if rc.output or rc.format == "text" else sys.stderr)
    return EXIT_OK


def cmd_collinear(args) -> int:
    rc = build_run_config(args)
    params = rc.params
    rows = []
    classes = []
    for order in canonical_orderings(rc.n):
        out = solve_collinear(params, order, rc.settings)
        row = {
            "ordering": [i + 1 for i in order],
            "status": out.status.value,
            "iterations": out.iterations,
            "residual_inf": fmt_real(out.residual),
        }
        if out.ok:
            c = make_class(params, out.points, id=len(classes) + 1)
            classes.append(c)
            row["record"] = class_record(c)
        rows.append(row)
    fps = [c.fingerprint for c in classes]
    distinct = len(fps) - sum(
        1 for i, f in enumerate(fps) if any(same_class(f, g) for g in fps[:i])
    )
    converged = sum(1 for r in rows if r["status"] == "converged")
    lower = math.factorial(rc.n) // 2
    summary = f"orderings={len(rows)} converged={converged} distinct={distinct} lower_bound={lower}"
    if rc.format == "json":
        doc = {"run_config": rc.to_json(), "rows": rows, "classes": [r["record"] for r in rows if "record" in r],
               "summary": {"orderings": len(rows), "converged": converged, "distinct": distinct,
                           "lower_bound": str(lower)}}
        _emit(_dump(doc), rc.output)
    elif rc.format == "csv":
        lines = ["ordering,status,iterations,residual_inf,positions"]
        for r in rows:
            pos = " ".join(p[0] for p in r["record"]["points"]) if "record" in r else ""
            lines.append(f"{'-'.join(map(str, r['ordering']))},{r['status']},{r['iterations']},"
                         f"{r['residual_inf']},{pos}")
        _emit("\n".join(lines) + "\n", rc.output)
    else:
        lines = []
        for r in rows:
            pos = " ".join(f"{float(p[0]):+.10f}" for p in r["record"]["points"]) if "record" in r else ""
            lines.append(f"{'-'.join(map(str, r['ordering']))} {r['status']} {r['iterations']} {pos}")
        _emit("\n".join(lines) + "\n", rc.output)
    print(summary, file=sys.stdout if rc.output or rc.format == "text" else sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rc = build_run_config(args)
    lo = rc.alpha if args.alpha_lo is None else args.alpha_lo
    hi = args.alpha_hi
    if hi < lo:
        raise UsageError("--alpha-hi must be >= --alpha-lo")
    start = replace(rc, alpha=lo)
    classes = multistart(start.params, rc.settings, _workers(args)).classes
    res = sweep(start.params, classes, lo, hi, args.steps, rc.settings)
    min_gaps = []
    for idx in range(len(res.alphas)):
        gaps = [t.gaps[idx] for t in res.tracks if len(t.gaps) > idx]
        min_gaps.append(min(gaps) if gaps else math.nan)
    if rc.format == "json":
        doc = {
            "run_config": start.to_json(),
            "alpha_lo": fmt_real(lo),
            "alpha_hi": fmt_real(hi),
            "steps": args.steps,
            "alphas": [fmt_real(a) for a in res.alphas],
            "counts": res.counts,
            "min_gap": [fmt_real(g) for g in min_gaps],
            "tracks": [
                {
                    "class_id": t.class_id,
                    "lost_at": None if t.lost_at is None else fmt_real(t.lost_at),
                    "gaps": [fmt_real(g) for g in t.gaps],
                    "distances": [[fmt_real(d) for d in f.distances] for f in t.fingerprints],
                }
                for t in res.tracks
            ],
            "events": [{"alpha": fmt_real(a), "class_id": cid, "gap": fmt_real(g)} for a, cid, g in res.events],
        }
        _emit(_dump(doc), rc.output)
    else:
        sep = "," if rc.format == "csv" else " "
        lines = [sep.join(["alpha", "count", "min_gap"])]
        for a, k, g in zip(res.alphas, res.counts, min_gaps):
            lines.append(sep.join([f"{a:.6g}", str(k), f"{g:.6g}"]))
        for a, cid, g in res.events:
            print(f"degeneration alpha={a:.6g} class={cid} gap={g:.3g}", file=sys.stderr)
        lost = [t for t in res.tracks if t.lost_at is not None]
        for t in lost:
            print(f"track lost class={t.class_id} alpha={t.lost_at:.6g}", file=sys.stderr)
        _emit("\n".join(lines) + "\n", rc.output)
    return EXIT_OK


def cmd_fewnomial(args) -> int:
    if args.n is None or args.n < 2:
        raise UsageError("n must be >= 2")
    masses = _parse_masses(args.masses) if args.masses else [1.0] * args.n
    if len(masses) != args.n:
        raise UsageError(f"got {len(masses)} masses for n={args.n}")
    try:
        params = PotentialParams(1.0, masses)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    system = build_system(params)
    s = system.summary()
    if args.dump:
        print(system.dump())
    if args.json:
        print(json.dumps(s, separators=(",", ":")))
    else:
        print(
            f"equations={s['equations']} degree3={s['degree3']} degree1={s['degree1']} "
            f"k={s['k']} khovanskii={s['khovanskii']}"
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    path = args.input
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    tol = args.tol
    if isinstance(doc, dict):
        if "classes" not in doc or not isinstance(doc["classes"], list):
            raise UsageError(f"{path}: field 'classes': expected a list of class records")
        records = doc["classes"]
        if tol is None:
            try:
                tol = float(doc["run_config"]["settings"]["tol_residual"])
            except (KeyError, TypeError, ValueError):
                tol = None
    elif isinstance(doc, list):
        records = doc
    else:
        raise UsageError(f"{path}: expected an object or a list of class records")
    tol = 1e-12 if tol is None else tol
    failed = 0
    for k, rec in enumerate(records):
        try:
            a = audit_record(rec, where=f"classes[{k}]", tol_residual=tol)
        except RecordError as exc:
            raise UsageError(f"{path}: {exc}") from None
        failed += not a.passed
        print(
            f"class {a.id} {'pass' if a.passed else 'FAIL'} residual={a.residual_inf:.3e} "
            f"ac={a.ac_residual_inf:.3e} matrix={a.matrix_residual_fro:.3e} lambda={a.lam:.15g}"
            + (f" ({a.reason})" if a.reason else "")
        )
    print(f"verified={len(records)} failed={failed}")
    return EXIT_FAIL if failed else EXIT_OK


# --- argument parsing ---------------------------------------------------------


def _run_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--masses", help="comma-separated, e.g. 1,1,1")
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", dest="tol_residual", type=float, help="residual tolerance (infinity norm)")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--threads", type=int, help="worker processes (default: $CCENUM_THREADS or all cores)")
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("json", "csv", "text"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccenum", description="Enumerate planar central configurations under homogeneous potentials."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = _run_options()

    p = sub.add_parser("bounds", help="exact upper/lower bounds for n bodies")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("enumerate", parents=[run], help="multi-start enumeration of classes")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("collinear", parents=[run], help="collinear configuration for every ordering")
    p.set_defaults(func=cmd_collinear)

    p = sub.add_parser("sweep", parents=[run], help="continue every class over an alpha range")
    p.add_argument("--alpha-lo", type=float)
    p.add_argument("--alpha-hi", type=float, required=True)
    p.add_argument("--steps", type=int, default=30)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fewnomial", help="polynomial-exponential system and its Khovanskii bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--masses")
    p.add_argument("--dump", action="store_true", help="print every equation")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fewnomial)

    p = sub.add_parser("verify", help="re-check saved class records")
    p.add_argument("input")
    p.add_argument("--tol", type=float, help="Cartesian residual tolerance (default: from the report)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
