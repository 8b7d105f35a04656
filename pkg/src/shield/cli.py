"""``shield`` command line: gen-traces, simulate, trust, rank, analyze.

Exit status is 0 on success, 1 on usage errors and 2 on bad input data.
Set SHIELD_LOG=off|info|debug to control diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import advisory, analytics, simulator, trace_io
from .encounter_core import build_matrices, write_matrices_csv
from .trust import ServiceTag, TrustMatrix, TrustParams

log = logging.getLogger("shield")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _setup_logging():
    level = os.environ.get("SHIELD_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(stream=sys.stderr, level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _seed_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            return [int(lo)]
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return list(range(a, b + 1))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shield", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen-traces", help="generate a synthetic world as four CSV files")
    g.add_argument("--config", required=True, help="JSON SyntheticWorldConfig")
    g.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("simulate", help="run the discrete-event simulation")
    s.add_argument("--config", required=True, help="JSON simulation config")
    s.add_argument("--seed", type=int, help="overrides the config seed")
    s.add_argument("--seeds", type=_seed_range, help="batch run over seeds A..B (inclusive)")
    s.add_argument("--out", required=True, help="MetricsReport JSON path")
    s.add_argument("--events", help="optional CSV event log path")

    t = sub.add_parser("trust", help="print a node's trust table as CSV")
    t.add_argument("--encounters", required=True)
    t.add_argument("--node", type=int, required=True)
    t.add_argument("--services", help="CSV node,tag of service roles")
    t.add_argument("--alpha", type=float, default=TrustParams.alpha)
    t.add_argument("--theta-friend", type=float, default=TrustParams.theta_friend)
    t.add_argument("--theta-acq", type=float, default=TrustParams.theta_acq)
    t.add_argument("--matrix-out", help="also write node_a,node_b,count,duration_s CSV")

    r = sub.add_parser("rank", help="rank locations by crime risk")
    r.add_argument("--crime", required=True)
    r.add_argument("--hour", type=int, choices=range(24), metavar="H")
    r.add_argument("--profile-out", help="also write the risk profile as JSON")

    a = sub.add_parser("analyze", help="hourly crime/density correlation report")
    a.add_argument("--crime", required=True)
    a.add_argument("--density", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--method", choices=("pearson", "spearman"), default="pearson",
                   help="spearman is for robustness comparisons only")
    return p


def _write_text(path, text: str) -> None:
    Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def cmd_gen_traces(args) -> None:
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    # a full simulation config is accepted too; its world section is used
    data = dict(data.get("world", data))
    if data.pop("type", "synthetic") != "synthetic":
        raise ValueError("gen-traces needs a synthetic world config")
    cfg = trace_io.SyntheticWorldConfig.from_dict(data)
    world = trace_io.generate_synthetic_world(cfg)
    for path in world.write(args.out):
        log.info("wrote %s", path)


def _simulate_one(cfg: simulator.SimConfig, events_path=None) -> dict:
    result = simulator.Simulation(cfg).run()
    if events_path:
        simulator.write_event_log(events_path, result.event_log)
    return result.report.to_dict()


def cmd_simulate(args) -> None:
    cfg = simulator.SimConfig.load(args.config)
    if args.seeds:
        if args.events:
            raise UsageError("--events cannot be combined with --seeds")
        # runs share nothing, so each seed gets a fresh config
        reports = {}
        for seed in args.seeds:
            cfg = simulator.SimConfig.load(args.config)
            cfg.seed = seed
            reports[str(seed)] = _simulate_one(cfg)
            log.info("seed %d done", seed)
        text = json.dumps(reports, indent=2, sort_keys=True)
    else:
        if args.seed is not None:
            cfg.seed = args.seed
        text = json.dumps(_simulate_one(cfg, args.events), indent=2, sort_keys=True)
    _write_text(args.out, text)


def _read_services(path) -> dict[int, ServiceTag]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if [c.strip() for c in next(reader, [])] != ["node", "tag"]:
            raise trace_io.TraceFormatError(path, 1, "expected header 'node,tag'")
        out = {}
        for row in reader:
            if not row:
                continue
            try:
                out[int(row[0])] = ServiceTag.parse(row[1])
            except (ValueError, KeyError, IndexError):
                raise trace_io.TraceFormatError(path, reader.line_num, f"bad row {row!r}") from None
        return out


def cmd_trust(args) -> None:
    events = trace_io.parse_encounter_trace(args.encounters)
    M, D = build_matrices(events)
    services = _read_services(args.services) if args.services else {}
    params = TrustParams(args.alpha, args.theta_friend, args.theta_acq)
    tm = TrustMatrix.build(M, D, params, services, nodes=[args.node])
    if args.matrix_out:
        write_matrices_csv(args.matrix_out, M, D)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["peer", "score", "class", "service_tag"])
    for peer, score, cls, tag in tm.report(args.node):
        out.writerow([peer, f"{score:.6f}", cls.label, tag.label])


def cmd_rank(args) -> None:
    profile = advisory.build_risk_profile(trace_io.parse_crime_log(args.crime))
    if args.profile_out:
        _write_text(args.profile_out, profile.to_json())
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["location", "aggregate_risk"])
    for loc, risk in advisory.rank_locations(profile, args.hour):
        out.writerow([loc, f"{risk:.6f}"])


def cmd_analyze(args) -> None:
    report = analytics.correlation_report(
        trace_io.parse_crime_log(args.crime),
        trace_io.parse_density_series(args.density),
        method=args.method,
    )
    _write_text(args.out, report.to_json())


COMMANDS = {
    "gen-traces": cmd_gen_traces,
    "simulate": cmd_simulate,
    "trust": cmd_trust,
    "rank": cmd_rank,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"shield: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
