"""``holimeter`` command line: run cases, compare reports, validate configs.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
import tempfile
from pathlib import Path

from .config import RunConfig, load_config
from .errors import (ConfigError, DataError, HolimeterError, KeyMismatch, MissingStorage,
                     SolverError, SpecError, StorageError, WindowViolation)
from .household.model import Household
from .report import CaseReport
from .runner import CaseResult, run_config

log = logging.getLogger("holimeter")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _classify(exc: BaseException) -> int:
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_CONFIG


def _fmt(v: float) -> str:
    return repr(float(v))


# -- writing -------------------------------------------------------------------

def _write_mi_rows(path: Path, reports) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["case", "appliance", "resource", "mi_bits"])
        for rep in reports:
            for e in rep.mi.entries:
                w.writerow([rep.case, e.appliance, e.resource.value, _fmt(e.mi_bits)])


def _write_case(dirpath: Path, result: CaseResult) -> None:
    rep = result.report
    dirpath.mkdir()
    (dirpath / "report.json").write_text(rep.to_json())
    _write_mi_rows(dirpath / "mi_table.csv", [rep])
    for t in result.series:
        labels = list(t.appliances)
        with open(dirpath / f"series_{rep.case}_{t.resource.value}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["epoch", "metered", *labels])
            for i in range(t.metered.size):
                w.writerow([int(t.epochs[i]), _fmt(t.metered[i]),
                            *(_fmt(t.appliances[k][i]) for k in labels)])


def write_outputs(out: Path, cfg: RunConfig, results: list[CaseResult], force: bool) -> None:
    """Write everything into a scratch directory, then move it into place."""
    out = out.resolve()
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        for res in results:
            _write_case(tmp / res.report.case, res)
        _write_mi_rows(tmp / "mi_table.csv", [r.report for r in results])
        (tmp / "run_config.json").write_text(
            json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        if out.exists():
            if not force:
                raise _Fail(EXIT_CONFIG, f"output directory {out} exists; pass --force")
            shutil.rmtree(out)
        tmp.rename(out)
    finally:
        if tmp.exists():
            shutil.rmtree(tmp)


# -- commands ------------------------------------------------------------------

def _household(cfg: RunConfig) -> Household:
    try:
        return cfg.build_household()
    except (OSError, DataError) as exc:
        raise _Fail(EXIT_DATA, f"data error: {exc}") from None
    except (SpecError, StorageError, WindowViolation) as exc:
        raise _Fail(EXIT_CONFIG, f"config error: {exc}") from None


def _check_cases(cfg: RunConfig, h: Household) -> None:
    from .shaper import case_problem
    for case in cfg.cases:
        if case in ("case1", "case2"):
            try:
                case_problem(case, h, cfg.case_settings())
            except MissingStorage as exc:
                raise _Fail(EXIT_CONFIG, f"config error: {exc}") from None
    if "downsample" in cfg.cases and h.horizon_slots % cfg.downsample_k:
        raise _Fail(EXIT_CONFIG, f"config error: downsample_k={cfg.downsample_k} does not "
                                 f"divide the horizon of {h.horizon_slots} slots")
    if isinstance(cfg.tariff, list) and len(cfg.tariff) not in (1, h.horizon_slots):
        raise _Fail(EXIT_CONFIG, f"config error: tariff has {len(cfg.tariff)} entries, "
                                 f"expected 1 or {h.horizon_slots}")


def _load(path, seed=None) -> RunConfig:
    try:
        return load_config(path, seed=seed)
    except ConfigError as exc:
        raise _Fail(EXIT_CONFIG, f"config error: {exc}") from None


def cmd_run(args) -> int:
    cfg = _load(args.config, args.seed)
    out = Path(args.out) if args.out else cfg.output
    if out is None:
        raise _Fail(EXIT_CONFIG, "config error: no output directory (set 'output' or --out)")
    if out.exists() and not args.force:
        raise _Fail(EXIT_CONFIG, f"output directory {out} exists; pass --force")
    h = _household(cfg)
    _check_cases(cfg, h)
    try:
        results = run_config(cfg, h)
    except HolimeterError as exc:
        code = _classify(exc)
        kind = {EXIT_SOLVER: "solver", EXIT_DATA: "data"}.get(code, "config")
        raise _Fail(code, f"{kind} error: {exc}") from None
    write_outputs(out, cfg, results, args.force)
    for res in results:
        rep = res.report
        print(f"{rep.case}: discomfort {rep.discomfort_minutes:g} min, cost {rep.cost:.4f}, "
              f"TV " + ", ".join(f"{r.value} {v:.4g}" for r, v in rep.tv.items()))
    print(f"wrote {out}")
    return EXIT_OK


def _read_report(path: str) -> CaseReport:
    try:
        return CaseReport.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise _Fail(EXIT_DATA, f"cannot read report {path}: {exc}") from None


def cmd_compare(args) -> int:
    if len(args.reports) < 2:
        raise _Fail(EXIT_DATA, "compare needs at least two reports")
    reports = [_read_report(p) for p in args.reports]
    if len({r.household for r in reports}) > 1:
        print("warning: reports come from different households", file=sys.stderr)
    names, seen = [], {}
    for r in reports:
        n = seen.get(r.case, 0)
        seen[r.case] = n + 1
        names.append(r.case if n == 0 else f"{r.case}#{n + 1}")
    keys = []
    for r in reports:
        for e in r.mi.entries:
            if (e.appliance, e.resource) not in keys:
                keys.append((e.appliance, e.resource))

    def mi(rep, key):
        try:
            return rep.mi.get(*key)
        except KeyError:
            return None

    rows = [[f"{a}/{r.value}"] + [mi(rep, (a, r)) for rep in reports] for a, r in keys]
    rows.append(["discomfort_minutes"] + [rep.discomfort_minutes for rep in reports])
    rows.append(["cost"] + [rep.cost for rep in reports])

    header = ["row"] + names
    text = [[c if isinstance(c, str) else ("-" if c is None else f"{c:.4f}") for c in row]
            for row in [header] + rows]
    widths = [max(len(row[i]) for row in text) for i in range(len(header))]
    for row in text:
        print("  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i])
                        for i, c in enumerate(row)))

    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "comparison.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([row[0]] + ["" if v is None else _fmt(v) for v in row[1:]])
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config, None)
        h = _household(cfg)
        _check_cases(cfg, h)
    except _Fail as exc:
        # validation reports every failure as a plain "invalid"
        raise _Fail(EXIT_CONFIG, str(exc)) from None
    shiftable = sum(len(a.window) > 1 for a in h.appliances)
    print(f"config OK: {len(h.appliances)} appliance runs ({shiftable} shiftable), "
          f"{h.horizon_slots} slots of {h.slot_seconds} s, "
          f"storage: {', '.join(u.name for u in h.storage) or 'none'}, "
          f"cases: {', '.join(cfg.cases)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holimeter",
                                description="Multi-resource smart-meter privacy toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the configured cases and write reports")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--force", action="store_true", help="replace an existing output directory")
    r.add_argument("--seed", type=int, help="override $HOLIMETER_SEED and the config seed")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="tabulate MI, discomfort and cost across reports")
    c.add_argument("reports", nargs="*")
    c.add_argument("--out", help="directory for comparison.csv (default: cwd)")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("validate", help="check a config without solving")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _Fail as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except KeyMismatch as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
