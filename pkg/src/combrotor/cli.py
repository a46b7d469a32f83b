"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import engine, formulas, harmonic, render, tables
from .errors import BudgetExceededError, DomainError
from .geometry import ClusterShape, cardinality_Bm, get_profile, vertices_to_csv, vertices_to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("combrotor")

POSITIONAL = {"render": ("snapshot",), "replay": ("config",)}


@dataclass
class RunConfig:
    """Everything needed to replay one invocation."""

    subcommand: str
    options: dict[str, Any] = field(default_factory=dict)
    output_dir: str | None = None
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def argv(self) -> list[str]:
        out = ["--format", self.format]
        if self.output_dir:
            out += ["--output-dir", self.output_dir]
        out.append(self.subcommand)
        positional = POSITIONAL.get(self.subcommand, ())
        out += [str(self.options[k]) for k in positional]
        for k, v in sorted(self.options.items()):
            if k in positional:
                continue
            flag = "--" + k.replace("_", "-")
            if v is None or v is False:
                continue
            if v is True:
                out.append(flag)
            else:
                out += [flag, str(v)]
        return out


class Output:
    def __init__(self, output_dir: str | None, quiet: bool):
        self.dir = Path(output_dir) if output_dir else None
        self.quiet = quiet
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text)

    def artifact(self, name: str, text: str) -> None:
        """Write to the output directory, or to stdout when there is none."""
        if self.dir:
            (self.dir / name).write_text(text)
            log.info("wrote %s", self.dir / name)
        else:
            sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_aggregate(args, out: Output) -> int:
    if (args.n is None) == (args.m is None):
        raise DomainError("give exactly one of --n and --m")
    n = args.n if args.n is not None else cardinality_Bm(args.m)
    agg = engine.aggregate(n, budget=args.budget)
    out.say(f"n={n} cluster={len(agg.cluster)} topplings={agg.steps}")
    fmt = args.emit or args.format
    if fmt == "json":
        out.artifact("cluster.json", vertices_to_json(agg.cluster) + "\n")
        out.artifact("state.json", agg.state.to_json() + "\n")
    elif fmt == "svg":
        out.artifact(
            "cluster.svg",
            render.render_configuration(agg.cluster, agg.state.rotors, agg.state.odometer, title=f"n={n}"),
        )
    else:
        out.artifact("cluster.csv", vertices_to_csv(agg.cluster))
        if out.dir:
            out.artifact("odometer.csv", tables.odometer_to_csv(agg.state.odometer))
    if args.snapshot:
        Path(args.snapshot).write_text(agg.state.to_json() + "\n")

    status = EXIT_OK
    if args.check_shape or args.check_odometer:
        m = args.m if args.m is not None else next(
            (k for k in range(n + 1) if cardinality_Bm(k) == n), None
        )
        if m is None:
            out.say(f"n={n} is not the size of any B_m; nothing to check")
            return EXIT_FAIL
        if args.check_shape:
            expected = set(ClusterShape(m).vertices())
            if agg.cluster == expected:
                out.say(f"shape: cluster == B_{m}")
            else:
                extra = sorted(agg.cluster - expected)
                missing = sorted(expected - agg.cluster)
                out.say(f"shape: MISMATCH extra={extra[:10]} missing={missing[:10]}")
                status = EXIT_FAIL
        if args.check_odometer:
            rows = tables.odometer_diff(agg.state.odometer, formulas.u_m_table(m))
            if rows:
                out.say(f"odometer: {len(rows)} points differ from the closed form")
                sys.stdout.write(tables.diff_to_csv(rows))
                status = EXIT_FAIL
            else:
                out.say(f"odometer: matches closed form for m={m}")
    return status


def cmd_halfline(args, out: Output) -> int:
    res = engine.halfline_process(args.n)
    out.say(f"n={args.n} h={res.h} r={res.r}")
    fmt = args.emit or args.format
    if fmt == "json":
        doc = {"n": args.n, "h": res.h, "r": res.r, "odometer": [[y, k] for y, k in sorted(res.odometer.items())]}
        out.artifact("halfline.json", json.dumps(doc) + "\n")
    else:
        out.artifact("halfline.csv", "y,u\n" + "".join(f"{y},{k}\n" for y, k in sorted(res.odometer.items())))
    if args.check:
        ok = (res.h, res.r) == formulas.halfline_h_r(args.n) and res.odometer == formulas.halfline_odometer(args.n)
        out.say("closed form: " + ("ok" if ok else "MISMATCH"))
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",")]


def cmd_verify(args, out: Output) -> int:
    if args.odometer_csv:
        u = tables.odometer_from_csv(Path(args.odometer_csv).read_text())
        if args.n is None:
            raise DomainError("--odometer-csv needs --n")
        v = engine.verify_odometer(u, args.n)
        out.say(f"odometer from {args.odometer_csv}, n={args.n}:")
        for line in v.report():
            out.say("  " + line)
        for line in v.violations:
            out.say("  " + line)
        return EXIT_OK if v.certified else EXIT_FAIL

    status = EXIT_OK
    for m in _parse_range(args.m):
        if m < 3 and not args.include_small:
            out.say(f"m={m}: outside the range of the closed form (m >= 3), skipped")
            continue
        u = formulas.u_m_table(m)
        B = ClusterShape(m)
        A = set(B.vertices()) - B.inner_boundary()
        v = engine.verify_odometer(u, cardinality_Bm(m), A)
        out.say(f"m={m}: {'certified' if v.certified else 'NOT certified'}")
        for line in v.report():
            out.say("  " + line)
        for line in v.violations:
            out.say("  " + line)
        if not v.certified:
            status = EXIT_FAIL
        if args.diff:
            agg = engine.aggregate(cardinality_Bm(m), budget=args.budget)
            rows = tables.odometer_diff(agg.state.odometer, u)
            out.artifact(f"diff_m{m}.csv", tables.diff_to_csv(rows))
            if rows:
                status = EXIT_FAIL
    return status


def cmd_harmonic(args, out: Output) -> int:
    h = get_profile(args.profile)
    if args.estimate_c:
        br = harmonic.estimate_c(args.max_x)
        out.say(
            f"X={br.X} c_lower={float(br.lower):.9f} c_upper={float(br.upper):.9f} "
            f"width={float(br.width):.3e} e(x)/x<1/2 from x={br.below_half_from}"
        )
        ok = 0 < br.lower <= br.upper < Fraction(1, 2)
        return EXIT_OK if ok else EXIT_FAIL
    if args.m is None:
        raise DomainError("--m is required")
    B = ClusterShape(args.m, h)

    def run(method: str) -> harmonic.BoundaryMeasure:
        if method == "rotor":
            r = harmonic.harmonic_by_rotor(B, cap=args.cap, budget=args.budget)
            out.say(f"rotor: n={r.n} exact={r.exact}")
            return r.measure
        if method == "recursion":
            _, meas = harmonic.harmonic_by_recursion(h, args.m)
            return meas
        if method == "montecarlo":
            return harmonic.harmonic_by_montecarlo(B, args.samples, seed=args.seed)
        raise DomainError(f"unknown method {method!r}")

    if args.compare:
        a, b = args.compare.split(",")
        ma, mb = run(a), run(b)
        worst = harmonic.max_discrepancy(ma, mb)
        out.say(f"max |nu_{a} - nu_{b}| = {worst:.3e}")
        if "montecarlo" in (a, b):
            mc, ref = (ma, mb) if a == "montecarlo" else (mb, ma)
            inside = harmonic.within_sigma(mc, ref, args.sigmas)
            bad = sorted(z for z, ok in inside.items() if not ok)
            out.say(f"{len(inside) - len(bad)}/{len(inside)} boundary points within {args.sigmas} sigma")
            return EXIT_OK if not bad else EXIT_FAIL
        return EXIT_OK if worst <= args.tolerance else EXIT_FAIL

    meas = run(args.method)
    fmt = args.emit or args.format
    if fmt == "json":
        out.artifact("measure.json", meas.to_json() + "\n")
    elif fmt == "svg":
        out.artifact("measure.svg", render.render_measure(meas.nu, B.vertices(), title=f"m={args.m}"))
    else:
        out.artifact("measure.csv", meas.to_csv())
    return EXIT_OK


def cmd_render(args, out: Output) -> int:
    state = engine.EngineState.from_json(Path(args.snapshot).read_text())
    cluster = {v for v, c in state.particles.nonzero().items() if c > 0} | set(state.odometer)
    out.artifact(
        "configuration.svg",
        render.render_configuration(cluster, state.rotors, state.odometer, labels=not args.no_labels),
    )
    return EXIT_OK


def cmd_replay(args, out: Output) -> int:
    cfg = RunConfig.from_json(Path(args.config).read_text())
    return main(cfg.argv())


COMMANDS = {
    "aggregate": cmd_aggregate,
    "halfline": cmd_halfline,
    "verify": cmd_verify,
    "harmonic": cmd_harmonic,
    "render": cmd_render,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="combrotor", description="Rotor-router experiments on the comb.")
    p.add_argument("--output-dir", help="write artifacts here instead of stdout")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    # the same options after the subcommand; SUPPRESS keeps the top-level defaults
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["csv", "json", "svg"], default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    a = add("aggregate", help="rotor-router aggregation from the origin")
    a.add_argument("--n", type=int)
    a.add_argument("--m", type=int)
    a.add_argument("--check-shape", action="store_true")
    a.add_argument("--check-odometer", action="store_true")
    a.add_argument("--emit", choices=["csv", "json", "svg"])
    a.add_argument("--snapshot", help="also write the final state as JSON here")
    a.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET)

    hl = add("halfline", help="the modified process on the half-line")
    hl.add_argument("--n", type=int, required=True)
    hl.add_argument("--check", action="store_true")
    hl.add_argument("--emit", choices=["csv", "json"])

    v = add("verify", help="certify the closed-form odometer")
    v.add_argument("--m", default="3..12", help="range a..b or list a,b,c")
    v.add_argument("--include-small", action="store_true")
    v.add_argument("--diff", action="store_true", help="also simulate and write x,y,simulated,formula")
    v.add_argument("--odometer-csv", help="certify an odometer table x,y,u instead")
    v.add_argument("--n", type=int)
    v.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET)

    hm = add("harmonic", help="harmonic measure of B_m")
    hm.add_argument("--profile", default="cluster")
    hm.add_argument("--m", type=int)
    hm.add_argument("--method", choices=["rotor", "recursion", "montecarlo"], default="recursion")
    hm.add_argument("--samples", type=int, default=100_000)
    hm.add_argument("--seed", type=int, default=0)
    hm.add_argument("--cap", type=int, default=10**7)
    hm.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET)
    hm.add_argument("--emit", choices=["csv", "json", "svg"])
    hm.add_argument("--compare", help="two methods, e.g. recursion,montecarlo")
    hm.add_argument("--tolerance", type=float, default=0.0)
    hm.add_argument("--sigmas", type=float, default=3.0)
    hm.add_argument("--estimate-c", action="store_true")
    hm.add_argument("--max-x", type=int, default=3000)

    r = add("render", help="SVG of a state snapshot")
    r.add_argument("snapshot")
    r.add_argument("--no-labels", action="store_true")

    rp = add("replay", help="re-run a saved run.json")
    rp.add_argument("config")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    out = Output(args.output_dir, args.quiet)
    options = {k: v for k, v in vars(args).items() if k not in ("output_dir", "format", "quiet", "verbose", "subcommand")}
    if out.dir and args.subcommand != "replay":
        cfg = RunConfig(args.subcommand, options, args.output_dir, args.format)
        (out.dir / "run.json").write_text(cfg.to_json() + "\n")
    try:
        return COMMANDS[args.subcommand](args, out)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
