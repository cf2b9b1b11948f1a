"""Command-line entry point: ``subshiftlab <group> <command> [options]``.

Results go to standard output as ``key=value`` lines or tables; ``--csv PATH``
writes tabular results as CSV instead (``-`` for standard output). Errors go
to standard error as ``error: [module] message``. Exit codes: 0 success,
1 domain/usage errors, 2 cap or precision exhaustion.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import WorkbenchError

PROG = "subshiftlab"


class UsageError(WorkbenchError):
    module = "cli"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


@dataclass(frozen=True)
class RunConfig:
    command: tuple
    csv: str | None
    threads: int
    cap_enum: int
    cap_matrix: int
    precision: int

    def __post_init__(self):
        for name in ("threads", "cap_enum", "cap_matrix", "precision"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _kv(out, **items):
    out.write(" ".join(f"{k}={_fmt(v)}" for k, v in items.items()) + "\n")


def _emit_table(cfg: RunConfig, out, header, rows):
    if cfg.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        if cfg.csv == "-":
            out.write(buf.getvalue())
        else:
            Path(cfg.csv).write_text(buf.getvalue())
        return
    for r in rows:
        _kv(out, **dict(zip(header, r)))


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _range(text: str):
    """``a..b`` (inclusive) or a single integer."""
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(text)]


def _betas(text: str) -> list:
    """``a:b:step`` (inclusive of b up to rounding) or a comma list."""
    if ":" in text:
        a, b, st = (Fraction(x) for x in text.split(":"))
        if st <= 0:
            raise UsageError("beta step must be positive")
        out, x = [], a
        while x <= b:
            out.append(float(x))
            x += st
        return out
    return [float(x) for x in text.split(",") if x]


def _schedule(args):
    from .bounds import SEED, STRICT, Schedule

    if getattr(args, "schedule", None):
        return Schedule.from_text(_read(args.schedule))
    return Schedule(*SEED, STRICT)


# -- bounds ---------------------------------------------------------------------


def cmd_bounds(cfg, args, out):
    from . import bounds

    if args.action == "binom":
        r = bounds.binom_bounds_check(args.n, _fraction(args.alpha))
        _kv(out, lower=r.lower, sum=r.sum, upper=f"{float(r.upper):.10g}", holds=r.holds)
    elif args.action == "entropy":
        v = bounds.binary_entropy(_fraction(args.t), prec=cfg.precision)
        _kv(out, t=args.t, H=str(v.interval), mid=v.interval.mid)
    elif args.action == "sandwich":
        rows = []
        for n in range(1, args.max_n + 1):
            for num in range(1, 9):
                r = bounds.binom_bounds_check(n, Fraction(num, 16))
                rows.append((n, f"{num}/16", r.lower, r.sum, float(r.upper), r.holds))
        _emit_table(cfg, out, ("n", "alpha", "lower", "sum", "upper", "holds"), rows)
        if not cfg.csv:
            _kv(out, cases=len(rows), all_hold=all(r[-1] for r in rows))
    return 0


# -- schedule ---------------------------------------------------------------------


def cmd_schedule(cfg, args, out):
    from .bounds import check_conditions, extend_schedule

    s = _schedule(args)
    if args.action == "show":
        out.write(s.to_text())
    elif args.action == "check":
        rows = []
        for k in range(1, s.depth):
            rep = check_conditions(s, k)
            for r in rep.results:
                rows.append((k, r.name, r.holds, r.margin_text()))
        if not rows:
            _kv(out, levels=s.depth, pairs=0)
        _emit_table(cfg, out, ("k", "condition", "holds", "margin"), rows)
    elif args.action == "extend":
        for _ in range(args.times):
            s = extend_schedule(s)
        text = s.to_text()
        if args.out:
            Path(args.out).write_text(text)
        out.write(text)
    return 0


# -- patterns -----------------------------------------------------------------------

PATTERN_COLUMNS = ("level", "parity", "count", "logWeighted", "marginBits")


def _parity(text):
    from .subshift import normalize_parity

    return normalize_parity({"+": "plus", "-": "minus"}.get(text, text))


def _base(text):
    return "e" if text == "e" else _fraction(text)


def cmd_patterns(cfg, args, out):
    from . import subshift as sx
    from .bounds import extend_schedule

    s = _schedule(args)
    if not args.schedule:
        # the default strict seed grows to the requested level
        while s.depth < args.level:
            s = extend_schedule(s)
    if args.action == "count":
        par = _parity(args.parity)
        n = sx.count_P(args.level, par, s, method=args.method, state_cap=cfg.cap_enum)
        lw = sx.weighted_G_count(args.level, par, s, _base(args.base), args.c, prec=cfg.precision)
        _emit_table(cfg, out, PATTERN_COLUMNS, [(args.level, par, n, lw.value, "")])
    elif args.action == "verify-51":
        rep = sx.verify_lemma51_chain(args.level, s, args.power, state_cap=cfg.cap_enum)
        rows = [(args.level, rep.tight, rep.tight_count if rep.mode != "strict" else "", "",
                 min(st.margin_bits for st in rep.steps))]
        _emit_table(cfg, out, PATTERN_COLUMNS, rows)
        if not cfg.csv:
            for st in rep.steps:
                _kv(out, step=st.name.replace(" ", "_"), holds=st.holds,
                    marginBits=round(st.margin_bits, 6))
            _kv(out, holds=rep.holds)
        return 0 if rep.holds else 1
    elif args.action == "verify-52":
        rep = sx.verify_prop52(args.level, s, args.power, _base(args.base), args.c, scale=args.scale)
        margin = min(st.margin_bits for st in rep.steps)
        rows = [(args.level, rep.tight, sx.count_P(args.level, rep.tight, s), rep.tight_log.mid, margin),
                (args.level, rep.rich, sx.count_P(args.level, rep.rich, s), rep.rich_log.mid, margin)]
        _emit_table(cfg, out, PATTERN_COLUMNS, rows)
        if not cfg.csv:
            _kv(out, holds=rep.holds)
        return 0 if rep.holds else 1
    return 0


# -- tiles ----------------------------------------------------------------------------


def _region(text, wrap):
    from .wang import Region

    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"region must be WxH, got {text!r}") from None
    return Region(w, h, wrap)


def _tileset(path_or_spec):
    from .wang import TileSet, coordinate_tileset

    if path_or_spec.startswith("coordinate:"):
        return coordinate_tileset(int(path_or_spec.split(":", 1)[1]))
    return TileSet.from_text(_read(path_or_spec))


def _macro_map(text, rho, tau, N):
    """Lines ``<rho tile> <N*N tau tiles, bottom row first>``."""
    from .wang import MacroTile

    ids = {n: i for i, n in enumerate(tau.names)}
    rids = {n: i for i, n in enumerate(rho.names)}
    r = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] not in rids or len(line) != 1 + N * N or any(t not in ids for t in line[1:]):
            raise UsageError(f"map line {lineno}: expected a rho tile and {N * N} tau tiles")
        r[rids[line[0]]] = MacroTile(N, tuple(ids[t] for t in line[1:]))
    return r


def cmd_tiles(cfg, args, out):
    from . import wang

    if args.action == "coordinate":
        out.write(wang.coordinate_tileset(args.n).to_text())
        return 0
    if args.action in ("solve", "count"):
        ts = _tileset(args.tileset)
        region = _region(args.region, args.wrap)
        if args.action == "count":
            _kv(out, transfer=wang.count_by_transfer(ts, region, column_cap=cfg.cap_matrix))
            return 0
        limit = args.limit if args.limit is not None else cfg.cap_enum
        tilings = wang.solve(ts, region, limit=limit)
        _kv(out, tilings=len(tilings))
        for i, t in enumerate(tilings):
            out.write(f"# tiling {i}\n{t}\n")
        return 0
    if args.action == "verify-sim":
        rho, tau = _tileset(args.rho), _tileset(args.tau)
        r = _macro_map(_read(args.map), rho, tau, args.zoom)
        rep = wang.verify_simulation(rho, tau, args.zoom, r, k_max=args.k)
        _kv(out, injective=rep.injective, matching=rep.matching, unique_split=rep.unique_split,
            bounded=rep.bounded)
        for k, n in rep.checked_tori:
            _kv(out, torus=k * args.zoom, tilings=n)
        if rep.warning:
            out.write(f"warning: {rep.warning}\n")
        return 0 if rep.holds else 1
    if args.action == "from-sft":
        from .core import parse_patterns

        F = parse_patterns(_read(args.patterns))
        out.write(wang.sft_to_wang(F).tileset.to_text())
        return 0
    return 0


# -- tm ---------------------------------------------------------------------------------


def _machine(spec):
    from . import tm

    if spec in tm.REFERENCE_MACHINES:
        return tm.reference_machine(spec)
    return tm.parse_tm(_read(spec))


def cmd_tm(cfg, args, out):
    from . import tm

    machine = _machine(args.machine)
    if args.action == "compile":
        ct = tm.compile_tm(machine)
        _kv(out, tiles=len(ct.tileset), expected=tm.expected_tile_count(machine))
        out.write(ct.tileset.to_text())
    elif args.action == "diagram":
        d = tm.simulate(machine, args.input, args.steps, width=args.width)
        _kv(out, height=d.height, halted=d.halted)
        out.write(d.render() + "\n")
    elif args.action == "tiling":
        ct = tm.compile_tm(machine)
        tilings = tm.tilings_of(ct, args.input, args.width, args.height, limit=cfg.cap_enum)
        match = None
        if len(tilings) == 1:
            try:
                sim = tm.simulate(machine, args.input, args.height - 1, width=args.width)
                match = ct.diagram(tilings[0]).rows == sim.rows
            except WorkbenchError:
                match = False
        _kv(out, tilings=len(tilings), matches_simulation="n/a" if match is None else match)
    elif args.action == "independence":
        rows = []
        for L in _range(args.lengths):
            rep = tm.input_independence(machine, L, args.width, args.height)
            counts = sorted(set(rep.counts.values()))
            rows.append((L, rep.width, rep.height, len(rep.counts), " ".join(map(str, counts)),
                         rep.constant))
        _emit_table(cfg, out, ("length", "width", "height", "inputs", "counts", "constant"), rows)
        return 0 if all(r[-1] for r in rows) else 1
    elif args.action == "macro":
        io_ = tuple(args.io.split(","))
        bundle = tm.assemble_macrotile(args.n, io_, machine, args.budget)
        sols = bundle.solutions(limit=cfg.cap_enum)
        _kv(out, N=args.n, tiles=len(bundle.tileset), blocks=len(sols),
            zone_tape=bundle.zone_tape(sols[0]) if sols else "-")
    return 0


# -- gibbs ---------------------------------------------------------------------------------


def _families(text, alphabet):
    from .core import Pattern

    fams = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] != "family" or len(parts) < 3:
            raise UsageError(f"families line {lineno}: expected 'family <name> <pattern>...'")
        fams.append((parts[1], [Pattern.from_symbols(alphabet, w) for w in parts[2:]]))
    return fams


def _geometry(strip):
    from .gibbs import Geometry

    return Geometry.chain() if strip in (None, 0, 1) else Geometry.strip(strip)


def cmd_gibbs(cfg, args, out):
    from . import gibbs

    if args.action == "demo":
        s = _schedule(args)
        betas = _betas(args.betas) if args.betas else gibbs.DEFAULT_DEMO_BETAS
        weights = [float(w) for w in args.weights.split(",")] if args.weights else None
        rep = gibbs.oscillation_demo(s, args.K, betas, weights, args.b, args.reading,
                                     threads=cfg.threads)
        header = gibbs.OscillationReport.CSV_COLUMNS
        _emit_table(cfg, out, header, [[row[c] for c in header] for row in rep.rows])
        if not cfg.csv or cfg.csv != "-":
            flip = "none" if rep.flip is None else f"{rep.flip[2]}->{rep.flip[3]}@{rep.flip[0]}..{rep.flip[1]}"
            _kv(out, flip=flip, predicted=rep.predicted, consistent=rep.consistent)
        return 0
    p = gibbs.parse_potential(_read(args.potential))
    geom = _geometry(args.strip)
    if args.action == "pressure":
        r = gibbs.pressure(p, args.beta, geom, cap=cfg.cap_matrix)
        _kv(out, beta=r.beta, pressure=r.pressure, entropy=r.entropy, energy=r.energy,
            residual_ok=r.variational_ok)
        for sym, m in r.marginals.items():
            _kv(out, symbol=sym, marginal=m)
    elif args.action == "sweep":
        fams = _families(_read(args.families), p.alphabet) if args.families else []
        reports = gibbs.sweep(p, _betas(args.betas), geom, threads=cfg.threads, cap=cfg.cap_matrix)
        header = ["beta", "pressure", "entropy", "energy"] + [f"mass_{n}" for n, _ in fams]
        rows = [[r.beta, r.pressure, r.entropy, r.energy] + [r.cylinder_mass(f) for _, f in fams]
                for r in reports]
        _emit_table(cfg, out, header, rows)
    return 0


# -- recode ----------------------------------------------------------------------------------


def cmd_recode(cfg, args, out):
    from . import gibbs, recoding

    p = gibbs.parse_potential(_read(args.potential))
    r = recoding.pressure_scaling_check(p, args.beta, args.m)
    _kv(out, m=r.m, beta=r.beta, base_pressure=r.base_pressure, block_pressure=r.block_pressure,
        ratio=r.ratio, holds=r.holds)
    return 0 if r.holds else 1


# -- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=PROG, description="Frequency-constrained subshifts, Wang tiles and "
                                       "Gibbs states on a desk scale.")
    p.add_argument("--csv", metavar="PATH", help="write tables as CSV ('-' = stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap-enum", type=int, default=1 << 20, help="enumeration / solution cap")
    p.add_argument("--cap-matrix", type=int, default=1 << 22, help="transfer-matrix edge cap")
    p.add_argument("--precision", type=int, default=128, help="interval working precision (bits)")
    groups = p.add_subparsers(dest="group", parser_class=_Parser)

    g = groups.add_parser("bounds", help="binomial sandwich and binary entropy")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = a.add_parser("binom")
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--alpha", required=True)
    x = a.add_parser("entropy")
    x.add_argument("--t", required=True)
    x = a.add_parser("sandwich")
    x.add_argument("--max-n", type=int, default=64)

    g = groups.add_parser("schedule", help="level schedules and their conditions")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("show", "check", "extend"):
        x = a.add_parser(name)
        x.add_argument("--schedule", metavar="FILE", help="schedule file (default: strict seed)")
        if name == "extend":
            x.add_argument("--times", type=int, default=1)
            x.add_argument("--out", metavar="FILE")

    g = groups.add_parser("patterns", help="admissible-pattern counts and counting chains")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("count", "verify-51", "verify-52"):
        x = a.add_parser(name)
        x.add_argument("--schedule", metavar="FILE")
        x.add_argument("--level", type=int, default=1 if name == "count" else 2)
        x.add_argument("--power", type=int, default=10)
        x.add_argument("--base", default="2")
        x.add_argument("--c", type=int, default=1)
        if name == "count":
            x.add_argument("--parity", default="+")
            x.add_argument("--method", choices=("dp", "brute"), default="dp")
        if name == "verify-52":
            x.add_argument("--scale", choices=("window", "site"), default="window")

    g = groups.add_parser("tiles", help="Wang tiles")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("solve", "count"):
        x = a.add_parser(name)
        x.add_argument("--tileset", required=True, help="file, or coordinate:N")
        x.add_argument("--region", required=True)
        x.add_argument("--wrap", choices=("free", "torus"), default="free")
        if name == "solve":
            x.add_argument("--limit", type=int)
    x = a.add_parser("coordinate")
    x.add_argument("--n", type=int, required=True)
    x = a.add_parser("verify-sim")
    x.add_argument("--rho", required=True)
    x.add_argument("--tau", required=True)
    x.add_argument("--zoom", type=int, required=True)
    x.add_argument("--map", required=True)
    x.add_argument("--k", type=int, default=2)
    x = a.add_parser("from-sft")
    x.add_argument("--patterns", required=True)

    g = groups.add_parser("tm", help="Turing machines and their tilings")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("compile", "diagram", "tiling", "independence", "macro"):
        x = a.add_parser(name)
        x.add_argument("--machine", required=True, help="file or reference machine name")
        if name in ("diagram", "tiling"):
            x.add_argument("--input", default="")
            x.add_argument("--width", type=int, required=True)
        if name == "diagram":
            x.add_argument("--steps", type=int, required=True)
        if name == "tiling":
            x.add_argument("--height", type=int, required=True)
        if name == "independence":
            x.add_argument("--lengths", default="2..6")
            x.add_argument("--width", type=int)
            x.add_argument("--height", type=int, default=4)
        if name == "macro":
            x.add_argument("--n", type=int, required=True)
            x.add_argument("--io", required=True, help="bottom,right,top,left bit strings")
            x.add_argument("--budget", type=int, default=2)

    g = groups.add_parser("gibbs", help="pressure, equilibrium states and the oscillation demo")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = a.add_parser("pressure")
    x.add_argument("--potential", required=True)
    x.add_argument("--beta", type=float, required=True)
    x.add_argument("--strip", type=int)
    x = a.add_parser("sweep")
    x.add_argument("--potential", required=True)
    x.add_argument("--betas", required=True, help="a:b:step or a comma list")
    x.add_argument("--families", metavar="FILE")
    x.add_argument("--strip", type=int)
    x = a.add_parser("demo")
    x.add_argument("--schedule", metavar="FILE", help="toy schedule file")
    x.add_argument("--K", type=int, default=2)
    x.add_argument("--betas")
    x.add_argument("--weights")
    x.add_argument("--b", type=float, default=2.0)
    x.add_argument("--reading", choices=("family", "literal"), default="family")

    g = groups.add_parser("recode", help="block recoding")
    a = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = a.add_parser("check")
    x.add_argument("--potential", required=True)
    x.add_argument("--m", type=int, default=2)
    x.add_argument("--beta", type=float, default=1.0)
    return p


COMMANDS = {"bounds": cmd_bounds, "schedule": cmd_schedule, "patterns": cmd_patterns,
            "tiles": cmd_tiles, "tm": cmd_tm, "gibbs": cmd_gibbs, "recode": cmd_recode}


def dispatch(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.group is None:
            err.write(parser.format_help())
            return 1
        cfg = RunConfig((args.group, args.action), args.csv, args.threads, args.cap_enum,
                        args.cap_matrix, args.precision)
        return COMMANDS[args.group](cfg, args, out)
    except WorkbenchError as e:
        err.write(f"error: {e}\n")
        return e.exit_code
    except (OSError, RecursionError) as e:
        err.write(f"error: [cli] {e}\n")
        return 1


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
