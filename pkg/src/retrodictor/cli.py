"""Command-line front end: ``retrodictor run | demo | oracle-check``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

from .checks import check_instance, failed_properties, oracle_check
from .qla import QLAError
from .retrodict import margenau_scenario, rotated_scenario, three_box_scenario
from .scenario import (
    ScenarioError,
    format_value,
    load_scenario,
    records_to_json,
    render_table,
    run_scenario,
    scenario_constants,
    strict_violations,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STRICT = 3
EXIT_PROPERTY = 4

DEMOS = ("margenau", "three-box", "rotated")


def scenario_path(name):
    """Path of a shipped scenario file."""
    return resources.files("retrodictor") / "scenarios" / f"{name}.json"


def _margenau_text():
    r = margenau_scenario()
    m = r.marginal
    return f"""\
Bayes's formula with the unmeasured denominator
  <z-|rho|z->                          = {format_value(r.naive_denominator)}
  naive value                          = {format_value(r.naive_value)}
Retrodiction keeping the y observation in the condition
  ABL value                            = {format_value(r.abl_value)}
  oracle Pr(y+ at 1 | z- at 2)         = {format_value(r.oracle_value)}
Marginal of z- summed over y outcomes  = {format_value(m.correct_value)}  (oracle {format_value(m.oracle_value)})
Unmeasured probability of z-           = {format_value(m.naive_value)}
  gap                                  = {format_value(m.gap)}

The state is prepared in z+, so z- never happens when nothing is measured
first. Once y has been measured, z- occurs half the time. Naive Bayes
divides by the unmeasured probability of z-, which is zero, so it is
undefined. The sum over y outcomes is the probability of z- after an
ignored y measurement, 1/2. Using that sum as the denominator gives the
correct value 1/2, which the sequential oracle confirms."""


def _three_box_text():
    r = three_box_scenario()
    lines = ["Coarse observation {P_j, 1 - P_j}:"]
    for label, (v, o) in r.coarse.items():
        lines.append(f"  Pr({label} | {label} or not, then phi) = {format_value(v)}  (oracle {format_value(o)})")
    lines.append("Fine observation {P_1, P_2, P_3}:")
    for label, (v, o) in r.fine.items():
        lines.append(f"  Pr({label} | some box, then phi)      = {format_value(v)}  (oracle {format_value(o)})")
    lines.append(f"coarse - fine for box1 = {format_value(r.coarse_fine_gap)}")
    lines.append("""
Asking "box 1 or not?" and post-selecting phi makes box 1 certain; asking
"box 2 or not?" makes box 2 certain. These are answers to two different
experiments. Opening all three boxes is a third experiment, where each box
gets 1/3. The conditions "box1 or not, then phi" and "some box, then phi"
are different events, which is why the numbers differ.""")
    return "\n".join(lines)


def _rotated_text():
    r = rotated_scenario()
    return f"""\
P  = standard basis of three boxes, P' = boxes 2 and 3 rotated by pi/4 about box 1
  Pr(box1 | P, then phi)   = {format_value(r.value_P)}  (oracle {format_value(r.oracle_P)})
  Pr(box1 | P', then phi)  = {format_value(r.value_Pprime)}  (oracle {format_value(r.oracle_Pprime)})
  gap                      = {format_value(r.gap)}
  zero-angle control gap   = {format_value(r.control_gap)}

P and P' share the vector for box 1, yet the retrodicted probability of
box 1 changes. What was measured alongside box 1 is part of the condition,
so a rotated complement gives a different answer."""


_DEMO_TEXT = {"margenau": _margenau_text, "three-box": _three_box_text, "rotated": _rotated_text}


def cmd_run(args):
    try:
        scenario = load_scenario(args.file)
        records = run_scenario(scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(render_table(records))
    if args.json:
        Path(args.json).write_text(records_to_json(records), encoding="utf-8")
    if args.strict:
        bad = strict_violations(records)
        if bad:
            print(f"strict: records {bad} are undefined or off the oracle by > 1e-9", file=sys.stderr)
            return EXIT_STRICT
    return EXIT_OK


def cmd_demo(args):
    if args.name not in DEMOS:
        print(f"error: unknown demo {args.name!r}; available: {', '.join(DEMOS)}", file=sys.stderr)
        return EXIT_VALIDATION
    path = scenario_path(args.name)
    with resources.as_file(path) as p:
        scenario = load_scenario(p)
    records = run_scenario(scenario)
    print(f"== demo: {args.name} ==")
    print(scenario_constants(scenario))
    print()
    print(_DEMO_TEXT[args.name]())
    print()
    print(render_table(records))
    return EXIT_OK


def cmd_oracle_check(args):
    if args.replay:
        data = json.loads(Path(args.replay).read_text(encoding="utf-8"))
        # one instance, one failure entry, or a whole --failures file
        entries = data if isinstance(data, list) else [data]
        failed = False
        for k, entry in enumerate(entries):
            if len(entries) > 1:
                print(f"instance {k}")
            dev = check_instance(entry.get("instance", entry))
            for name, d in dev.items():
                print(f"{name:36s} {d!r}")
            failed = failed or bool(failed_properties(dev))
        return EXIT_PROPERTY if failed else EXIT_OK
    start = time.perf_counter()
    summary = oracle_check(args.seed, args.trials, args.max_dim)
    elapsed = time.perf_counter() - start
    print(f"seed={summary.seed} trials={summary.trials} max_dim={summary.max_dim}")
    for name, d in summary.worst.items():
        print(f"  worst {name:36s} {d:.3e}")
    print(f"passed {summary.passed}, failed {summary.failed}, "
          f"worst deviation {summary.worst_deviation:.3e}, {elapsed:.2f} s")
    if summary.ok:
        return EXIT_OK
    for f in summary.failures:
        print("FAILED " + json.dumps(f, allow_nan=True), file=sys.stderr)
    if args.failures:
        Path(args.failures).write_text(json.dumps(summary.failures, indent=2) + "\n", encoding="utf-8")
    return EXIT_PROPERTY


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _dim(text):
    n = int(text)
    if not 2 <= n <= 8:
        raise argparse.ArgumentTypeError(f"must be in [2, 8], got {n}")
    return n


def build_parser():
    parser = argparse.ArgumentParser(
        prog="retrodictor",
        description="Retrodictive probabilities for sequences of projective measurements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a JSON scenario file")
    p.add_argument("file")
    p.add_argument("--json", metavar="PATH", help="write machine-readable records to PATH")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 if any result is undefined or off the oracle by > 1e-9")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("demo", help=f"run a shipped demo ({', '.join(DEMOS)})")
    p.add_argument("name")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("oracle-check", help="randomized closed-form vs oracle checks")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--max-dim", type=_dim, default=4)
    p.add_argument("--replay", metavar="PATH", help="re-check one serialized instance")
    p.add_argument("--failures", metavar="PATH", help="write failing instances to PATH")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QLAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
