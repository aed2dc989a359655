"""Command line entry point: ``lunarcomm {access,link,chain,report}``.

Exit status is 0 on success, 2 when the scenario or arguments fail
validation, and 1 on any other error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import reports
from .scenario import ScenarioError, load_scenario, parse_sizes, run_access_study, run_chain_study

log = logging.getLogger("lunarcomm")

EXIT_OK, EXIT_FAULT, EXIT_INVALID = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="paper_case_study",
                        help="scenario TOML file or bundled scenario name (default: paper_case_study)")
    common.add_argument("--out", default="lunarcomm_out", type=Path, help="output directory")
    common.add_argument("--step", type=float, help="override the access grid step in seconds")
    common.add_argument("--sizes", help="constellation sizes for the access study, e.g. 1x1,2x2,4x4")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for the access study")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lunarcomm", description="Hybrid RF/FSO Earth-Moon relay chain simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("access", parents=[common], help="access intervals and statistics per constellation size")
    sub.add_parser("link", parents=[common], help="per-sample RF and FSO link metrics over the chain windows")
    sub.add_parser("chain", parents=[common], help="link metrics plus the per-pattern chain summary")
    sub.add_parser("report", parents=[common], help="everything above plus summary.md")
    return p


def _load(args):
    scenario = load_scenario(args.scenario)
    if args.step is not None:
        if not 0 < args.step <= scenario.duration:
            raise ScenarioError(f"--step must satisfy 0 < step <= duration, got {args.step}")
        scenario = scenario.with_step(args.step)
    sizes = None
    if args.sizes:
        try:
            sizes = parse_sizes(args.sizes)
        except ValueError as exc:
            raise ScenarioError(f"--sizes: {exc}") from None
    if args.jobs < 1:
        raise ScenarioError(f"--jobs must be >= 1, got {args.jobs}")
    return scenario, sizes


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        scenario, sizes = _load(args)
        out: Path = args.out
        written = []
        results = None
        if args.command in ("access", "report"):
            results = run_access_study(scenario, sizes, jobs=args.jobs)
            written += reports.write_access(out, results)
            print(reports.access_table(results, scenario.duration))
        if args.command in ("link", "chain", "report"):
            c = scenario.constellation
            own = None
            if results is not None:
                own = next((r for r in results if (r.planes, r.sats_per_plane) == (c.planes, c.sats_per_plane)), None)
            study = run_chain_study(scenario, own)
            written.append(reports.write_link_metrics(out, study))
            if args.command == "link":
                print(reports.link_table(scenario, study))
            else:
                written.append(reports.write_chain_summary(out, study))
                print(reports.chain_table(study))
            if args.command == "report":
                if results is None:  # pragma: no cover - report always runs the access study
                    results = run_access_study(scenario, sizes, jobs=args.jobs)
                written.append(reports.write_summary(out, scenario, results, study))
        for path in written:
            log.info("wrote %s", path)
        return EXIT_OK
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("internal fault", exc_info=True)
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_FAULT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
