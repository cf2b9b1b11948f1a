"""Deterministic Turing machines, their space-time diagrams and Wang-tile compilation.

A tiling row is one time step. Vertical colors carry a cell's content: a tape
symbol, or a ``(state, symbol)`` head cell. Horizontal colors are quiescent
(``.``) except where the head crosses a column boundary (``>q`` / ``<q``). No
tile has a halting head cell on its bottom edge, so once a halting state
appears a tiling cannot continue upward.

Input rows use dedicated tiles whose bottom colors (``in:s`` and ``in*:s``)
pin the whole row through the region's boundary constraints.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BoundaryExit, ContractViolation, LayoutError, ParseError
from .wang import Region, Tile, TileSet, Tiling, color, count_solutions, solve

MODULE = "tm-tiles"
MOVES = {"L": -1, "R": 1, "S": 0}
QUIET = color(".")


@dataclass(frozen=True)
class TMSpec:
    states: tuple
    initial: str
    halting: frozenset
    blank: str
    alphabet: tuple  # tape symbols, blank first
    rules: tuple  # sorted ((q, s), (q2, s2, move)) pairs

    def __post_init__(self):
        if self.initial not in self.states:
            raise ContractViolation(f"initial state {self.initial!r} undeclared", module=MODULE)
        if not self.halting <= set(self.states):
            raise ContractViolation("halting states must be declared", module=MODULE)
        object.__setattr__(self, "rules", tuple(sorted(dict(self.rules).items())))

    @property
    def delta(self) -> dict:
        return dict(self.rules)

    def step(self, q, s):
        return self.delta[(q, s)]


def parse_tm(text: str) -> TMSpec:
    """Parse ``states``/``halt``/``blank``/``symbols``/``initial``/``rule`` lines.

    The initial state is the first one listed under ``states`` unless an
    ``initial`` line names another. The tape alphabet is the blank, the
    ``symbols`` line (optional) and every symbol used by a rule. Every pair of a
    non-halting state and a tape symbol needs exactly one rule.
    """
    states, halting, blank, initial, extra = None, set(), None, None, []
    rules, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "states":
            states = tuple(rest)
            if len(set(states)) != len(states) or not states:
                raise ParseError("states must be nonempty and distinct", lineno, module=MODULE)
        elif head == "halt":
            halting |= set(rest)
        elif head == "blank":
            if len(rest) != 1:
                raise ParseError("blank takes one symbol", lineno, module=MODULE)
            blank = rest[0]
        elif head == "symbols":
            extra.extend(rest)
        elif head == "initial":
            if len(rest) != 1:
                raise ParseError("initial takes one state", lineno, module=MODULE)
            initial = (rest[0], lineno)
        elif head == "rule":
            if len(rest) != 6 or rest[2] != "->" or rest[5] not in MOVES:
                raise ParseError(f"expected 'rule q s -> q2 s2 L|R|S', got {line!r}", lineno, module=MODULE)
            key = (rest[0], rest[1])
            if key in rules:
                raise ParseError(f"duplicate transition for {key} (first on line {where[key]})",
                                 lineno, module=MODULE)
            rules[key] = (rest[3], rest[4], rest[5])
            where[key] = lineno
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, module=MODULE)
    if states is None:
        raise ParseError("missing 'states' line", module=MODULE)
    if blank is None:
        raise ParseError("missing 'blank' line", module=MODULE)
    if initial is None:
        initial = (states[0], None)
    if initial[0] not in states:
        raise ParseError(f"initial state {initial[0]!r} is not declared", initial[1], module=MODULE)
    if not halting <= set(states):
        raise ParseError(f"undeclared halting states {sorted(halting - set(states))}", module=MODULE)
    for (q, s), (q2, _, _) in rules.items():
        if q not in states or q2 not in states:
            raise ParseError(f"rule uses an undeclared state", where[(q, s)], module=MODULE)
        if q in halting:
            raise ParseError(f"halting state {q!r} has a rule", where[(q, s)], module=MODULE)
    alphabet = list(dict.fromkeys([blank, *extra, *(s for _, s in rules),
                                   *(s2 for _, s2, _ in rules.values())]))
    for q in states:
        if q in halting:
            continue
        for s in alphabet:
            if (q, s) not in rules:
                raise ParseError(f"missing rule for state {q!r} reading {s!r}", module=MODULE)
    return TMSpec(states, initial[0], frozenset(halting), blank, tuple(alphabet), tuple(rules.items()))


def format_tm(tm: TMSpec) -> str:
    lines = ["states " + " ".join(tm.states)]
    if tm.initial != tm.states[0]:
        lines.append(f"initial {tm.initial}")
    if tm.halting:
        lines.append("halt " + " ".join(q for q in tm.states if q in tm.halting))
    lines.append(f"blank {tm.blank}")
    lines.append("symbols " + " ".join(tm.alphabet))
    for (q, s), (q2, s2, m) in tm.rules:
        lines.append(f"rule {q} {s} -> {q2} {s2} {m}")
    return "\n".join(lines) + "\n"


# Reference machines. The counter keeps the least significant bit on the left
# and marks cell 0 (a = marked 0, b = marked 1) so it can find its way back.
RIGHT_MOVER = """\
states q0
blank _
symbols 0 1
rule q0 _ -> q0 _ R
rule q0 0 -> q0 0 R
rule q0 1 -> q0 1 R
"""

BINARY_COUNTER = """\
states start inc ret
blank _
symbols 0 1 a b
rule start _ -> inc a S
rule start 0 -> inc a S
rule start 1 -> inc b S
rule start a -> inc a S
rule start b -> inc b S
rule inc _ -> ret 1 L
rule inc 0 -> ret 1 L
rule inc 1 -> inc 0 R
rule inc a -> ret b S
rule inc b -> inc a R
rule ret _ -> ret _ L
rule ret 0 -> ret 0 L
rule ret 1 -> ret 1 L
rule ret a -> inc a S
rule ret b -> inc b S
"""

IMMEDIATE_HALT = """\
states h
halt h
blank _
symbols 0 1
"""

HALT_AFTER_ONE = """\
states q0 h
halt h
blank _
symbols 0 1
rule q0 _ -> h _ S
rule q0 0 -> h 0 S
rule q0 1 -> h 1 S
"""

# Never halts: the head shuttles between cells 0 and 1 without writing.
SHUTTLE = """\
states go back
blank _
symbols 0 1
rule go _ -> back _ R
rule go 0 -> back 0 R
rule go 1 -> back 1 R
rule back _ -> go _ L
rule back 0 -> go 0 L
rule back 1 -> go 1 L
"""

# Halts exactly when the first two cells read "11"; otherwise idles forever.
REJECT_11 = """\
states first second idle h
halt h
blank _
symbols 0 1
rule first _ -> idle _ S
rule first 0 -> idle 0 S
rule first 1 -> second 1 R
rule second _ -> idle _ S
rule second 0 -> idle 0 S
rule second 1 -> h 1 S
rule idle _ -> idle _ S
rule idle 0 -> idle 0 S
rule idle 1 -> idle 1 S
"""

# Halts when tape cell 0 reads 1.
REJECT_FIRST_1 = """\
states q0 idle h
halt h
blank _
symbols 0 1
rule q0 _ -> idle _ S
rule q0 0 -> idle 0 S
rule q0 1 -> h 1 S
rule idle _ -> idle _ S
rule idle 0 -> idle 0 S
rule idle 1 -> idle 1 S
"""

ACCEPT_ALL = """\
states q0
blank _
symbols 0 1
rule q0 _ -> q0 _ S
rule q0 0 -> q0 0 S
rule q0 1 -> q0 1 S
"""

REFERENCE_MACHINES = {
    "right-mover": RIGHT_MOVER, "binary-counter": BINARY_COUNTER,
    "immediate-halt": IMMEDIATE_HALT, "halt-after-one": HALT_AFTER_ONE,
    "shuttle": SHUTTLE, "reject-11": REJECT_11, "reject-first-1": REJECT_FIRST_1,
    "accept-all": ACCEPT_ALL,
}


def reference_machine(name: str) -> TMSpec:
    try:
        return parse_tm(REFERENCE_MACHINES[name])
    except KeyError:
        raise ContractViolation(f"unknown machine {name!r}; known: {sorted(REFERENCE_MACHINES)}",
                                module=MODULE) from None


# -- simulation ------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeDiagram:
    """rows[t][x] is a tape symbol or a (state, symbol) head cell; rows[0] is time 0."""

    width: int
    rows: tuple
    halted: bool = False

    @property
    def height(self) -> int:
        return len(self.rows)

    def head(self, t: int):
        return next(x for x, c in enumerate(self.rows[t]) if isinstance(c, tuple))

    def render(self) -> str:
        """One line per time step, latest on top (like the tiling)."""
        cell = lambda c: f"[{c[0]}:{c[1]}]" if isinstance(c, tuple) else c
        return "\n".join(" ".join(cell(c) for c in row) for row in reversed(self.rows))


def _tape(tm: TMSpec, input: str, width: int):
    syms = list(input) if all(len(s) == 1 for s in tm.alphabet) else input.split()
    if width is None:
        width = len(syms)
    if len(syms) > width:
        raise ContractViolation(f"input longer than width {width}", module=MODULE)
    bad = [s for s in syms if s not in tm.alphabet]
    if bad:
        raise ContractViolation(f"symbols {bad} not on the tape alphabet", module=MODULE)
    return syms + [tm.blank] * (width - len(syms)), width


def simulate(tm: TMSpec, input: str, steps: int, width: int | None = None) -> SpaceTimeDiagram:
    """Rows for times 0..steps (fewer if a halting state is reached).

    The head starts on cell 0 in the initial state; the input is padded with
    blanks to ``width`` (default: the input length).
    """
    if steps < 0:
        raise ContractViolation("steps must be >= 0", module=MODULE)
    tape, width = _tape(tm, input, width)
    if width < 1:
        raise ContractViolation("width must be positive", module=MODULE)
    q, pos = tm.initial, 0
    rows = []
    delta = tm.delta
    for t in range(steps + 1):
        rows.append(tuple((q, s) if x == pos else s for x, s in enumerate(tape)))
        if q in tm.halting:
            return SpaceTimeDiagram(width, tuple(rows), halted=True)
        if t == steps:
            break
        q, tape[pos], move = delta[(q, tape[pos])]
        pos += MOVES[move]
        if not 0 <= pos < width:
            raise BoundaryExit(f"head left the tape of width {width} at step {t + 1}", step=t + 1,
                               module=MODULE)
    return SpaceTimeDiagram(width, tuple(rows))


# -- compilation ---------------------------------------------------------------------


def content_color(cell) -> str:
    return color(f"{cell[0]}:{cell[1]}" if isinstance(cell, tuple) else cell)


def input_color(cell) -> str:
    return color(f"in*:{cell[1]}" if isinstance(cell, tuple) else f"in:{cell}")


@dataclass(frozen=True)
class CompiledTiles:
    tm: TMSpec
    tileset: TileSet
    origin: tuple  # per tile: ("quiet", s) | ("rule", q, s) | ("receive", move, q, s) | ("input", cell)
    input_tiles: dict  # symbol -> tile index; ("head", symbol) -> tile index of the starting head cell
    head_colors: dict  # (state, symbol) -> vertical color

    def region(self, input: str, width: int, height: int) -> Region:
        """w x h free region: bottom row pinned to the input, quiescent sides."""
        tape, _ = _tape(self.tm, input, width)
        b = {("left", y): QUIET for y in range(height)}
        b.update({("right", y): QUIET for y in range(height)})
        for x, s in enumerate(tape):
            b[("bottom", x)] = input_color((self.tm.initial, s) if x == 0 else s)
        return Region(width, height, "free", b)

    def diagram(self, t: Tiling) -> SpaceTimeDiagram:
        """Read the space-time diagram off a tiling (top colors, bottom row first)."""
        decode = {}
        for s in self.tm.alphabet:
            decode[content_color(s)] = s
            for q in self.tm.states:
                decode[content_color((q, s))] = (q, s)
        rows = tuple(tuple(decode[t.tile(x, y).top] for x in range(t.region.width))
                     for y in range(t.region.height))
        halted = any(isinstance(c, tuple) and c[0] in self.tm.halting for c in rows[-1])
        return SpaceTimeDiagram(t.region.width, rows, halted)


def expected_tile_count(tm: TMSpec) -> int:
    """Closed form: |Γ| quiescent + |δ| rule tiles + |Γ| receivers per (direction, target)
    among moving rules + 2|Γ| input tiles."""
    G = len(tm.alphabet)
    targets = {(m, q2) for (_, (q2, _, m)) in tm.rules if m != "S"}
    return G + len(tm.rules) + G * len(targets) + 2 * G


def compile_tm(tm: TMSpec) -> CompiledTiles:
    tiles, names, origin = [], [], []

    def add(tile, name, why):
        tiles.append(tile)
        names.append(name)
        origin.append(why)

    for s in tm.alphabet:
        c = content_color(s)
        add(Tile(QUIET, QUIET, c, c), f"quiet:{s}", ("quiet", s))
    receivers = []
    for (q, s), (q2, s2, m) in tm.rules:
        bottom = content_color((q, s))
        if m == "S":
            add(Tile(QUIET, QUIET, content_color((q2, s2)), bottom), f"rule:{q}:{s}", ("rule", q, s))
        elif m == "R":
            add(Tile(QUIET, color(f">{q2}"), content_color(s2), bottom), f"rule:{q}:{s}", ("rule", q, s))
        else:
            add(Tile(color(f"<{q2}"), QUIET, content_color(s2), bottom), f"rule:{q}:{s}", ("rule", q, s))
        if m != "S" and (m, q2) not in receivers:
            receivers.append((m, q2))
    for m, q2 in receivers:
        for u in tm.alphabet:
            top, bottom = content_color((q2, u)), content_color(u)
            if m == "R":
                t = Tile(color(f">{q2}"), QUIET, top, bottom)
            else:
                t = Tile(QUIET, color(f"<{q2}"), top, bottom)
            add(t, f"recv{m}:{q2}:{u}", ("receive", m, q2, u))
    input_tiles = {}
    for s in tm.alphabet:
        input_tiles[s] = len(tiles)
        add(Tile(QUIET, QUIET, content_color(s), input_color(s)), f"in:{s}", ("input", s))
    for s in tm.alphabet:
        cell = (tm.initial, s)
        input_tiles[("head", s)] = len(tiles)
        add(Tile(QUIET, QUIET, content_color(cell), input_color(cell)), f"in*:{s}", ("input", cell))
    head_colors = {(q, s): content_color((q, s)) for q in tm.states for s in tm.alphabet}
    return CompiledTiles(tm, TileSet(tuple(tiles), tuple(names)), tuple(origin), input_tiles, head_colors)


def tilings_of(ct: CompiledTiles, input: str, width: int, height: int, limit: int = 1 << 16) -> list:
    return solve(ct.tileset, ct.region(input, width, height), limit=limit)


def count_computation_fillings(checker: TMSpec, input: str, w: int, h: int,
                               compiled: CompiledTiles | None = None) -> int:
    """Legal fillings of the w x h region above the pinned input row."""
    ct = compiled or compile_tm(checker)
    return count_solutions(ct.tileset, ct.region(input, w, h + 1))


@dataclass
class IndependenceReport:
    length: int
    width: int
    height: int
    counts: dict  # input -> count

    @property
    def constant(self) -> bool:
        return len(set(self.counts.values())) <= 1


def input_independence(checker: TMSpec, length: int, w: int | None = None, h: int = 4,
                       symbols=("0", "1")) -> IndependenceReport:
    """count_computation_fillings over every input of the given length."""
    w = w or max(length, 2)
    ct = compile_tm(checker)
    counts = {}
    for word in itertools.product(symbols, repeat=length):
        s = "".join(word)
        counts[s] = count_computation_fillings(checker, s, w, h, compiled=ct)
    return IndependenceReport(length, w, h, counts)


# -- one level of the macro-tile layout -----------------------------------------------

SIDE_ORDER = ("bottom", "right", "top", "left")


@dataclass(frozen=True)
class MacroLayout:
    """Geometry of one N x N macro tile.

    Boundary bits sit on the middle ell cells of each side. Wire w (tape cell w,
    sides in the order bottom, right, top, left) runs from its boundary cell along
    a private column to its routing row w + 1, then along that row to column
    zone_x + w, then up into the zone's input row. The zone occupies rows
    zone_y .. zone_y + budget (time 0 .. budget) and 4 * ell columns.
    """

    N: int
    ell: int
    budget: int

    @property
    def mid(self) -> int:
        return (self.N - self.ell) // 2

    @property
    def zone_x(self) -> int:
        return self.mid + self.ell + 1

    @property
    def zone_y(self) -> int:
        return 4 * self.ell + 1

    @property
    def zone_width(self) -> int:
        return 4 * self.ell

    def entry(self, w: int):
        """Boundary cell of wire w and the side the bit comes in from."""
        side, i = SIDE_ORDER[w // self.ell], w % self.ell
        N, m = self.N, self.mid
        return side, {"bottom": (m + i, 0), "top": (m + i, N - 1),
                      "left": (0, m + i), "right": (N - 1, m + i)}[side]

    def descent_column(self, w: int) -> int:
        side, (x, y) = self.entry(w)
        i = w % self.ell
        return {"bottom": x, "top": x, "left": 1 + i, "right": self.N - 2 - i}[side]

    def problems(self) -> list:
        ell, N = self.ell, self.N
        out = []
        if self.mid <= ell + 1:
            out.append("left wires' columns reach the middle cells")
        if self.zone_y + self.budget >= self.mid:
            out.append("zone reaches the middle rows")
        if self.zone_x + self.zone_width - 1 >= N - 1 - ell:
            out.append("zone reaches the right wires' columns")
        return out

    @classmethod
    def minimum(cls, ell: int, budget: int) -> int:
        N = 1
        while cls(N, ell, budget).problems():
            N += 1
        return N

    def paths(self) -> list:
        """Cells of each wire with the direction in/out: list of [(x, y, came_from, goes_to)]."""
        out = []
        for w in range(4 * self.ell):
            side, (x, y) = self.entry(w)
            R, cx, dx = w + 1, self.zone_x + w, self.descent_column(w)
            pts = [(x, y)]
            while (x, y) != (dx, y):  # horizontal entry (left/right sides)
                x += 1 if dx > x else -1
                pts.append((x, y))
            while y != R:
                y += 1 if R > y else -1
                pts.append((x, y))
            while x != cx:
                x += 1 if cx > x else -1
                pts.append((x, y))
            while y != self.zone_y - 1:
                y += 1
                pts.append((x, y))
            first = {"bottom": "bottom", "top": "top", "left": "left", "right": "right"}[side]
            cells = []
            for k, (px, py) in enumerate(pts):
                came = first if k == 0 else _direction(pts[k], pts[k - 1])
                goes = "top" if k == len(pts) - 1 else _direction(pts[k], pts[k + 1])
                cells.append((px, py, came, goes))
            out.append(cells)
        return out


def _direction(a, b) -> str:
    dx, dy = b[0] - a[0], b[1] - a[1]
    return {(1, 0): "right", (-1, 0): "left", (0, 1): "top", (0, -1): "bottom"}[(dx, dy)]


@dataclass
class MacroBundle:
    layout: MacroLayout
    tileset: TileSet
    region: Region
    checker: TMSpec
    io: tuple
    zone_inputs: dict = field(default_factory=dict)  # tape cell -> (x, y) of its input tile

    def solutions(self, limit: int = 1 << 10) -> list:
        return solve(self.tileset, self.region, limit=limit, area_cap=self.region.area)

    def exists(self) -> bool:
        return bool(solve(self.tileset, self.region, limit=1 << 30, area_cap=self.region.area)[:1])

    def zone_tape(self, t: Tiling) -> str:
        """Bits arriving at the zone input row (read from the decoration layer)."""
        out = []
        for w in range(self.layout.zone_width):
            x, y = self.zone_inputs[w]
            out.append(t.tile(x, y).bottom.split("|", 1)[1].split(":")[-1])
        return "".join(out)


def _pair(coord: str, deco: str) -> str:
    return color(f"{coord}|{deco}")


def assemble_macrotile(N: int, io, checker: TMSpec, budget: int) -> MacroBundle:
    """Coordinate tiles x decoration tiles for one N x N macro tile.

    ``io`` = bit strings on the (bottom, right, top, left) sides, all of length
    ell. The block region pins coordinates (offset 0) and the boundary bits, so
    a legal block exists iff the checker, run on the concatenated strings, does
    not halt within ``budget`` steps (and keeps its head on the 4*ell tape).
    """
    io = tuple(io)
    if len(io) != 4 or len({len(s) for s in io}) != 1 or not io[0]:
        raise ContractViolation("io must be four nonempty strings of equal length", module=MODULE)
    ell = len(io[0])
    if budget < 1:
        raise ContractViolation("budget must be >= 1", module=MODULE)
    layout = MacroLayout(N, ell, budget)
    minimum = MacroLayout.minimum(ell, budget)
    if layout.problems():
        raise LayoutError(f"N={N} too small for ell={ell}, budget={budget}: minimum is {minimum}",
                          minimum=minimum, module=MODULE)
    bits = sorted(set("".join(io)))
    if not set(bits) <= set(checker.alphabet):
        raise ContractViolation("io bits must be tape symbols of the checker", module=MODULE)
    ct = compile_tm(checker)
    # decoration options per cell; default is the blank decoration
    deco = {}
    for cells in layout.paths():
        for k, (x, y, came, goes) in enumerate(cells):
            opts = deco.setdefault((x, y), {})
            opts[(came, goes)] = True
    zx, zy, Z = layout.zone_x, layout.zone_y, layout.zone_width
    tiles, names = [], []
    quiet_content = {content_color(s) for s in checker.alphabet} | {
        content_color((q, s)) for q in checker.states if q not in checker.halting for s in checker.alphabet}
    for i in range(N):
        for j in range(N):
            cl, cr = f"{i}.{j}", f"{(i + 1) % N}.{j}"
            ct_, cb = f"{i}.{(j + 1) % N}", f"{i}.{j}"
            options = []
            in_zone = zx <= i < zx + Z and zy <= j <= zy + layout.budget
            if in_zone:
                for k, t in enumerate(ct.tileset.tiles):
                    kind = ct.origin[k][0]
                    if (j == zy) != (kind == "input"):
                        continue
                    if kind == "input" and (ct.origin[k][1].__class__ is tuple) != (i == zx):
                        continue
                    lft = t.left if i > zx else (t.left if t.left == QUIET else None)
                    rgt = t.right if i < zx + Z - 1 else (t.right if t.right == QUIET else None)
                    if lft is None or rgt is None:
                        continue
                    bottom = t.bottom
                    if kind == "input":
                        # fed by the wire below: decoration color carries the bit
                        bottom = color(f"w:{ct.origin[k][1][1] if isinstance(ct.origin[k][1], tuple) else ct.origin[k][1]}")
                    options.append((lft, rgt, t.top, bottom, ct.tileset.names[k]))
            elif zx <= i < zx + Z and j == zy + layout.budget + 1:
                for c in sorted(quiet_content):  # above the zone: any non-halting content
                    options.append((QUIET, QUIET, QUIET, c, f"cap:{c}"))
            elif (i, j) in deco:
                for (came, goes) in deco[(i, j)]:
                    for b in bits:
                        wc = color(f"w:{b}")
                        side = {"left": QUIET, "right": QUIET, "top": QUIET, "bottom": QUIET}
                        side[came] = wc
                        side[goes] = wc
                        options.append((side["left"], side["right"], side["top"], side["bottom"],
                                        f"wire:{came}>{goes}:{b}"))
                # crossings: this cell may carry one horizontal and one vertical wire
                options = _with_crossings(options, deco[(i, j)], bits)
            else:
                options.append((QUIET, QUIET, QUIET, QUIET, "blank"))
            for (l, r, t, b, nm) in options:
                tiles.append(Tile(_pair(cl, l), _pair(cr, r), _pair(ct_, t), _pair(cb, b)))
                names.append(f"{i}.{j}:{nm}")
    ts = TileSet(tuple(tiles), tuple(names))
    boundary = {}
    for y in range(N):
        boundary[("left", y)] = _pair(f"0.{y}", QUIET)
        boundary[("right", y)] = _pair(f"0.{y}", QUIET)
    for x in range(N):
        boundary[("bottom", x)] = _pair(f"{x}.0", QUIET)
        boundary[("top", x)] = _pair(f"{x}.0", QUIET)
    for w in range(Z):
        side, (x, y) = layout.entry(w)
        bit = io[w // ell][w % ell]
        pos = y if side in ("left", "right") else x
        coord = {"left": f"0.{y}", "right": f"0.{y}", "bottom": f"{x}.0", "top": f"{x}.0"}[side]
        boundary[(side, pos)] = _pair(coord, color(f"w:{bit}"))
    region = Region(N, N, "free", boundary)
    zone_inputs = {w: (zx + w, zy) for w in range(Z)}
    return MacroBundle(layout, ts, region, checker, io, zone_inputs)


def _with_crossings(options, paths_here: dict, bits):
    """Cells where a vertical and a horizontal wire cross get product tiles."""
    dirs = list(paths_here)
    straight_v = [d for d in dirs if set(d) == {"top", "bottom"}]
    straight_h = [d for d in dirs if set(d) == {"left", "right"}]
    if len(dirs) == 1:
        return options
    if len(dirs) == 2 and straight_v and straight_h:
        out = []
        for bv in bits:
            for bh in bits:
                v, h = color(f"w:{bv}"), color(f"w:{bh}")
                out.append((h, h, v, v, f"cross:{bv}{bh}"))
        return out
    raise AssertionError(f"unexpected wire overlap {dirs}")
