"""Command line entry point: ``multlab run <config>`` and ``multlab list-suites``.

Exit codes: 0 when every asserted check passes, 1 on a failed check or a
numeric failure, 2 on a configuration error.  ``MULTLAB_WORKERS`` sets the
number of worker processes used to run suites (default 1).
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import SUITES, TOLERANCES, load_config
from .errors import ConfigurationError
from .reports import write_rows, write_summary
from .suites import SUITE_INFO, Context, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _workers() -> int:
    raw = os.environ.get("MULTLAB_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"MULTLAB_WORKERS must be an integer, got {raw!r}")
    if n < 1:
        raise ConfigurationError("MULTLAB_WORKERS must be at least 1")
    return n


def list_suites() -> str:
    lines = [f"{'suite':<16}{'anchor':<30}{'criteria':<22}default tolerances"]
    for name in SUITES:
        info = SUITE_INFO[name]
        tols = ", ".join(f"{k}={TOLERANCES[k]:g}" for k in info.tolerances)
        lines.append(f"{name:<16}{info.anchor:<30}{','.join(info.criteria):<22}{tols}")
    return "\n".join(lines)


def run(config_path, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = load_config(config_path)
        workers = _workers()
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_CONFIG
    print(cfg.echo(), file=out, end="")
    outdir = Path(cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"configuration error: cannot create {outdir}: {exc}", file=err)
        return EXIT_CONFIG
    (outdir / "resolved_config.ini").write_text(cfg.echo())

    if workers > 1 and len(cfg.suites) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_suite, cfg.suites, [cfg] * len(cfg.suites)))
    else:
        ctx = Context(cfg)
        results = [run_suite(name, cfg, ctx) for name in cfg.suites]

    checks, code = [], EXIT_OK
    for res in results:
        for line in res.log:
            print(f"[{res.name}] {line}", file=err)
        if res.error:
            kind = "configuration error" if res.error_kind == "config" else "numeric failure"
            print(f"{kind} in suite {res.name}: {res.error}", file=err)
            code = max(code, EXIT_CONFIG if res.error_kind == "config" else EXIT_FAIL)
            continue
        if res.rows:
            write_rows(outdir / f"{res.name}.csv", res.rows)
        for key, rows in res.tables.items():
            write_rows(outdir / f"{res.name}-{key}.csv", rows)
        for c in res.checks:
            checks.append(c)
            status = "info" if not c.asserted else ("PASS" if c.passed else "FAIL")
            print(f"{status:<5} {c.check}", file=out)
            if c.asserted and not c.passed:
                code = max(code, EXIT_FAIL)
    write_summary(outdir / "summary.csv", checks)
    n_fail = sum(c.asserted and not c.passed for c in checks)
    print(f"{len(checks)} checks, {n_fail} failed; results in {outdir}", file=out)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="multlab",
                                     description="Spectral multiplier verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the suites named in a config file")
    p_run.add_argument("config", help="INI config path")
    sub.add_parser("list-suites", help="list suites, anchors and default tolerances")
    args = parser.parse_args(argv)
    if args.command == "list-suites":
        print(list_suites())
        return EXIT_OK
    return run(args.config)


if __name__ == "__main__":
    sys.exit(main())
