"""Wang tiles: legality, exhaustive search, exact transfer counting and macro tiles.

Coordinates: cell (x, y) with x to the right and y upwards; cells are visited
row-major from the bottom row. Tile indices follow the tile set's order, and
search tries candidates in ascending index. Both are fixed, so results are
reproducible.

Boundary constraints of a free region are keyed by ``("left", y)``,
``("right", y)``, ``("bottom", x)`` and ``("top", x)`` and fix the color on
that outer edge.
"""
from __future__ import annotations

import itertools
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from .core import Alphabet, ForbiddenSet, Pattern, Window
from .errors import (CapExceeded, ContractViolation, ConversionError, EnumerationOverflow,
                     ParseError)

MODULE = "wang-tiling"
DEFAULT_AREA_CAP = 4096
DEFAULT_SOLUTION_CAP = 1 << 16
DEFAULT_COLUMN_CAP = 1 << 18
SIDES = ("left", "right", "top", "bottom")


def color(name) -> str:
    """Colors are interned strings, so equal names are the same object."""
    return sys.intern(str(name))


@dataclass(frozen=True)
class Tile:
    left: str
    right: str
    top: str
    bottom: str

    def __post_init__(self):
        for side in SIDES:
            object.__setattr__(self, side, color(getattr(self, side)))


@dataclass(frozen=True)
class TileSet:
    tiles: tuple
    names: tuple = ()

    def __post_init__(self):
        seen, tiles, names = set(), [], []
        given = list(self.names) or [str(i) for i in range(len(self.tiles))]
        if len(given) != len(self.tiles):
            raise ContractViolation("one name per tile", module=MODULE)
        for t, n in zip(self.tiles, given):
            if t not in seen:
                seen.add(t)
                tiles.append(t)
                names.append(str(n))
        if not tiles:
            raise ContractViolation("tile set must be nonempty", module=MODULE)
        if len(set(names)) != len(names):
            raise ContractViolation("duplicate tile names", module=MODULE)
        object.__setattr__(self, "tiles", tuple(tiles))
        object.__setattr__(self, "names", tuple(names))

    def __len__(self):
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def __getitem__(self, i) -> Tile:
        return self.tiles[i]

    @cached_property
    def id(self) -> dict:
        return {t: i for i, t in enumerate(self.tiles)}

    @property
    def colors(self) -> tuple:
        out = []
        for t in self.tiles:
            for side in SIDES:
                c = getattr(t, side)
                if c not in out:
                    out.append(c)
        return tuple(out)

    @cached_property
    def _by_side(self) -> dict:
        """side -> color -> bitmask of tiles with that color on that side."""
        out = {s: defaultdict(int) for s in SIDES}
        for i, t in enumerate(self.tiles):
            for s in SIDES:
                out[s][getattr(t, s)] |= 1 << i
        return out

    def with_color(self, side: str, c) -> int:
        return self._by_side[side].get(color(c), 0)

    def to_text(self) -> str:
        lines = ["colors " + " ".join(self.colors)]
        for n, t in zip(self.names, self.tiles):
            lines.append(f"tile {n} l={t.left} r={t.right} t={t.top} b={t.bottom}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TileSet":
        declared, tiles, names = None, [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "colors":
                declared = set(parts[1:])
            elif parts[0] == "tile" and len(parts) == 6:
                try:
                    kv = dict(p.split("=", 1) for p in parts[2:])
                    t = Tile(kv["l"], kv["r"], kv["t"], kv["b"])
                except (KeyError, ValueError):
                    raise ParseError(f"malformed tile line {line!r}", lineno, module=MODULE) from None
                if declared is not None and not {t.left, t.right, t.top, t.bottom} <= declared:
                    raise ParseError(f"tile {parts[1]} uses an undeclared color", lineno, module=MODULE)
                tiles.append(t)
                names.append(parts[1])
            else:
                raise ParseError(f"expected 'colors ...' or 'tile <id> l= r= t= b=', got {line!r}",
                                 lineno, module=MODULE)
        if not tiles:
            raise ParseError("no tiles", module=MODULE)
        return cls(tuple(tiles), tuple(names))


@dataclass(frozen=True)
class Region:
    width: int
    height: int
    wrap: str = "free"
    boundary: tuple = ()  # sorted ((side, position), color) pairs

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractViolation("region sides must be positive", module=MODULE)
        if self.wrap not in ("free", "torus"):
            raise ContractViolation(f"wrap must be free or torus, got {self.wrap!r}", module=MODULE)
        b = self.boundary
        if isinstance(b, dict):
            b = b.items()
        b = tuple(sorted(((tuple(k), color(v)) for k, v in b), key=lambda kv: (kv[0], kv[1])))
        if b and self.wrap == "torus":
            raise ContractViolation("torus regions take no boundary constraints", module=MODULE)
        for (side, pos), _ in b:
            limit = self.height if side in ("left", "right") else self.width
            if side not in SIDES or not 0 <= pos < limit:
                raise ContractViolation(f"bad boundary position {(side, pos)}", module=MODULE)
        object.__setattr__(self, "boundary", b)

    @property
    def area(self) -> int:
        return self.width * self.height

    @cached_property
    def constraints(self) -> dict:
        return dict(self.boundary)

    def neighbors(self, x: int, y: int):
        """(direction, nx, ny) for existing neighbours; direction is the side of (x, y)."""
        w, h = self.width, self.height
        for d, dx, dy in (("right", 1, 0), ("left", -1, 0), ("top", 0, 1), ("bottom", 0, -1)):
            nx, ny = x + dx, y + dy
            if self.wrap == "torus":
                yield d, nx % w, ny % h
            elif 0 <= nx < w and 0 <= ny < h:
                yield d, nx, ny


OPPOSITE = {"left": "right", "right": "left", "top": "bottom", "bottom": "top"}


@dataclass(frozen=True)
class Tiling:
    tileset: TileSet
    region: Region
    cells: tuple  # tile indices, row-major from the bottom row

    def at(self, x: int, y: int) -> int:
        return self.cells[y * self.region.width + x]

    def tile(self, x: int, y: int) -> Tile:
        return self.tileset[self.at(x, y)]

    def grid(self) -> list:
        """Tile names, top row first (as printed)."""
        w, h = self.region.width, self.region.height
        return [[self.tileset.names[self.at(x, y)] for x in range(w)] for y in reversed(range(h))]

    def __str__(self):
        return "\n".join(" ".join(row) for row in self.grid())


def validate(t: Tiling) -> bool:
    """All abutting edges (with wrap-around on tori) match and boundary colors hold."""
    r = t.region
    if len(t.cells) != r.area or any(not 0 <= c < len(t.tileset) for c in t.cells):
        return False
    for y in range(r.height):
        for x in range(r.width):
            tile = t.tile(x, y)
            for d, nx, ny in r.neighbors(x, y):
                if getattr(tile, d) != getattr(t.tile(nx, ny), OPPOSITE[d]):
                    return False
    for (side, pos), c in r.boundary:
        x, y = _boundary_cell(r, side, pos)
        if getattr(t.tile(x, y), side) != c:
            return False
    return True


def _boundary_cell(r: Region, side: str, pos: int):
    return {"left": (0, pos), "right": (r.width - 1, pos), "bottom": (pos, 0),
            "top": (pos, r.height - 1)}[side]


# -- search ------------------------------------------------------------------------


class _Search:
    def __init__(self, ts: TileSet, region: Region):
        self.ts, self.region = ts, region
        w, h = region.width, region.height
        self.n = w * h
        self.nbrs = [[(d, ny * w + nx) for d, nx, ny in region.neighbors(x, y)]
                     for y in range(h) for x in range(w)]
        self.full = (1 << len(ts)) - 1
        self._support = {}
        self.colors = {s: [getattr(t, s) for t in ts] for s in SIDES}

    def support(self, dom: int, d: str) -> int:
        """Tiles allowed on side ``d`` of a cell whose domain is ``dom``."""
        key = (dom, d)
        got = self._support.get(key)
        if got is None:
            cols = set()
            m, i = dom, 0
            col = self.colors[d]
            while m:
                if m & 1:
                    cols.add(col[i])
                m >>= 1
                i += 1
            got = 0
            for c in cols:
                got |= self.ts.with_color(OPPOSITE[d], c)
            self._support[key] = got
        return got

    def initial(self):
        dom = [self.full] * self.n
        w = self.region.width
        for (side, pos), c in self.region.boundary:
            x, y = _boundary_cell(self.region, side, pos)
            dom[y * w + x] &= self.ts.with_color(side, c)
        return dom if self.propagate(dom, list(range(self.n))) else None

    def propagate(self, dom, queue) -> bool:
        pending = set(queue)
        queue = list(queue)
        while queue:
            c = queue.pop()
            pending.discard(c)
            if dom[c] == 0:
                return False
            for d, nb in self.nbrs[c]:
                new = dom[nb] & self.support(dom[c], d)
                if new != dom[nb]:
                    if not new:
                        return False
                    dom[nb] = new
                    if nb not in pending:
                        pending.add(nb)
                        queue.append(nb)
        return True

    def run(self, limit: int, count_only: bool = False):
        dom = self.initial()
        found, count = [], 0
        if dom is None:
            return found, 0
        stack = [(dom, 0)]
        # explicit DFS; children pushed in reverse so ascending indices come out first
        while stack:
            dom, cell = stack.pop()
            while cell < self.n and dom[cell] & (dom[cell] - 1) == 0:
                cell += 1  # already decided
            if cell == self.n:
                count += 1
                if count > limit:
                    raise EnumerationOverflow(f"more than {limit} tilings", cap=limit,
                                              partial=limit, module=MODULE)
                if not count_only:
                    found.append(tuple(d.bit_length() - 1 for d in dom))
                continue
            children = []
            m = dom[cell]
            while m:
                low = m & -m
                m ^= low
                child = list(dom)
                child[cell] = low
                if self.propagate(child, [cell]):
                    children.append((child, cell + 1))
            stack.extend(reversed(children))
        return found, count


def solve(ts: TileSet, region: Region, limit: int = DEFAULT_SOLUTION_CAP,
          area_cap: int = DEFAULT_AREA_CAP) -> list:
    """All legal tilings (at most ``limit``), in lexicographic row-major order."""
    if region.area > area_cap:
        raise CapExceeded(f"region area {region.area} exceeds cap {area_cap}", cap=area_cap,
                          module=MODULE)
    cells, _ = _Search(ts, region).run(limit)
    return [Tiling(ts, region, c) for c in cells]


def count_solutions(ts: TileSet, region: Region, limit: int = 1 << 40,
                    area_cap: int = DEFAULT_AREA_CAP) -> int:
    """Number of legal tilings by search (no tilings are stored)."""
    if region.area > area_cap:
        raise CapExceeded(f"region area {region.area} exceeds cap {area_cap}", cap=area_cap,
                          module=MODULE)
    return _Search(ts, region).run(limit, count_only=True)[1]


def _columns(ts: TileSet, region: Region, x: int, cap: int):
    """Vertically matched columns at position x, respecting top/bottom/side constraints."""
    h = region.height
    cons = region.constraints
    out = []

    def ok(t: Tile, y):
        if (c := cons.get(("left", y))) is not None and x == 0 and t.left != c:
            return False
        if (c := cons.get(("right", y))) is not None and x == region.width - 1 and t.right != c:
            return False
        if y == 0 and (c := cons.get(("bottom", x))) is not None and t.bottom != c:
            return False
        if y == h - 1 and (c := cons.get(("top", x))) is not None and t.top != c:
            return False
        return True

    def extend(col):
        y = len(col)
        if y == h:
            if region.wrap == "torus" and ts[col[-1]].top != ts[col[0]].bottom:
                return
            out.append(tuple(col))
            if len(out) > cap:
                raise CapExceeded(f"more than {cap} columns of height {h}", cap=cap, module=MODULE)
            return
        for i, t in enumerate(ts.tiles):
            if (y == 0 or ts[col[-1]].top == t.bottom) and ok(t, y):
                col.append(i)
                extend(col)
                col.pop()

    extend([])
    return out


def count_by_transfer(ts: TileSet, region: Region, column_cap: int = DEFAULT_COLUMN_CAP) -> int:
    """Exact tiling count, column by column, with Python integers.

    Columns are grouped by their left and right color signatures; the count
    is a product of (signature x signature) matrices, traced on a torus.
    """
    w = region.width
    sig = lambda col, side: tuple(getattr(ts[i], side) for i in col)

    def matrix(x):
        M = defaultdict(int)
        for col in _columns(ts, region, x, column_cap):
            M[(sig(col, "left"), sig(col, "right"))] += 1
        return M

    if region.wrap == "torus":
        M = matrix(0)
        total = 0
        starts = sorted({a for a, _ in M})
        rows = defaultdict(list)
        for (a, b), n in M.items():
            rows[a].append((b, n))
        for s in starts:
            v = {s: 1}
            for _ in range(w):
                nv = defaultdict(int)
                for a, n in v.items():
                    for b, m in rows.get(a, ()):
                        nv[b] += n * m
                v = nv
            total += v.get(s, 0)
        return total
    v = None
    for x in range(w):
        M = matrix(x)
        nv = defaultdict(int)
        for (a, b), n in M.items():
            nv[b] += n * (1 if v is None else v.get(a, 0))
        v = nv
    return sum(v.values())


# -- coordinate tiles and macro tiles ---------------------------------------------


def coordinate_tileset(N: int) -> TileSet:
    """Tile (i, j): left = bottom = (i, j), right = (i+1, j), top = (i, j+1), mod N."""
    if N < 2:
        raise ContractViolation("coordinate tiles need N >= 2", module=MODULE)
    c = lambda i, j: f"{i % N}.{j % N}"
    tiles, names = [], []
    for i in range(N):
        for j in range(N):
            tiles.append(Tile(left=c(i, j), right=c(i + 1, j), top=c(i, j + 1), bottom=c(i, j)))
            names.append(f"t{i}.{j}")
    return TileSet(tuple(tiles), tuple(names))


@dataclass(frozen=True)
class MacroTile:
    """N x N internally matched block; ``cells`` row-major from the bottom row."""

    N: int
    cells: tuple

    def at(self, x, y) -> int:
        return self.cells[y * self.N + x]

    def colors(self, ts: TileSet, side: str) -> tuple:
        N = self.N
        pos = {"left": [(0, y) for y in range(N)], "right": [(N - 1, y) for y in range(N)],
               "bottom": [(x, 0) for x in range(N)], "top": [(x, N - 1) for x in range(N)]}[side]
        return tuple(getattr(ts[self.at(x, y)], side) for x, y in pos)

    def as_pattern(self, ts: TileSet) -> Pattern:
        alph = Alphabet(ts.names)
        win = Window.rectangle(self.N, self.N)
        return Pattern(alph, win, tuple(self.at(x, y) for (x, y) in win.ordered))


def macro_tiles(ts: TileSet, N: int, cap: int = DEFAULT_SOLUTION_CAP) -> list:
    """All internally matched N x N blocks (outer edges unconstrained)."""
    return [MacroTile(N, t.cells) for t in solve(ts, Region(N, N), limit=cap)]


def coordinate_macro(N: int, i0: int = 0, j0: int = 0) -> MacroTile:
    """The coordinate block whose lower-left tile is (i0, j0)."""
    return MacroTile(N, tuple(((i0 + x) % N) * N + (j0 + y) % N for y in range(N) for x in range(N)))


@dataclass
class SimulationReport:
    injective: bool
    matching: bool
    unique_split: bool
    bounded: bool = True        # clause (c) is checked on finite tori only
    checked_tori: list = field(default_factory=list)  # (k, number of tilings)
    warning: str | None = None
    failures: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.injective and self.matching and self.unique_split


def verify_simulation(rho: TileSet, tau: TileSet, N: int, r, k_max: int = 2,
                      limit: int = DEFAULT_SOLUTION_CAP) -> SimulationReport:
    """Check that ``r`` (rho tile index -> MacroTile over tau) is a simulation.

    (a) r is injective; (b) rho-adjacency holds iff the images' macro colors
    match; (c) every tau-tiling of the kN x kN torus, k <= k_max, splits into
    r-images along exactly one grid. If a torus has too many tilings, (c) is
    reported as unchecked there (a warning, not a failure).
    """
    r = dict(r) if not isinstance(r, dict) else r
    if set(r) != set(range(len(rho))):
        raise ContractViolation("r must be defined on every rho tile", module=MODULE)
    images = [r[i] for i in range(len(rho))]
    if any(m.N != N for m in images):
        raise ContractViolation("macro tiles must have size N", module=MODULE)
    failures = []
    injective = len({m.cells for m in images}) == len(images)
    if not injective:
        failures.append("(a) two rho tiles share a macro tile")
    matching = True
    for a, b in itertools.product(range(len(rho)), repeat=2):
        h_rho = rho[a].right == rho[b].left
        h_tau = images[a].colors(tau, "right") == images[b].colors(tau, "left")
        v_rho = rho[a].top == rho[b].bottom
        v_tau = images[a].colors(tau, "top") == images[b].colors(tau, "bottom")
        if h_rho != h_tau or v_rho != v_tau:
            matching = False
            failures.append(f"(b) adjacency of {rho.names[a]}, {rho.names[b]} not preserved")
    for m in images:
        # images must themselves be internally matched
        ok = all(tau[m.at(x, y)].right == tau[m.at(x + 1, y)].left for y in range(N) for x in range(N - 1)) \
            and all(tau[m.at(x, y)].top == tau[m.at(x, y + 1)].bottom for y in range(N - 1) for x in range(N))
        if not ok:
            matching = False
            failures.append("(b) an image is not a macro tile")
    report = SimulationReport(injective, matching, True, failures=failures)
    blocks = {m.cells for m in images}
    for k in range(1, k_max + 1):
        size = k * N
        try:
            tilings = solve(tau, Region(size, size, "torus"), limit=limit)
        except EnumerationOverflow:
            report.warning = f"torus {size}x{size} has more than {limit} tilings; unchecked"
            break
        report.checked_tori.append((k, len(tilings)))
        for t in tilings:
            splits = sum(1 for ox in range(N) for oy in range(N) if _splits(t, N, k, ox, oy, blocks))
            if splits != 1:
                report.unique_split = False
                failures.append(f"(c) a tiling of the {size}x{size} torus has {splits} splits")
                break
        if not report.unique_split:
            break
    return report


def _splits(t: Tiling, N, k, ox, oy, blocks) -> bool:
    size = k * N
    for bx in range(k):
        for by in range(k):
            cells = tuple(t.at((ox + bx * N + x) % size, (oy + by * N + y) % size)
                          for y in range(N) for x in range(N))
            if cells not in blocks:
                return False
    return True


# -- SFT -> Wang ---------------------------------------------------------------------


@dataclass(frozen=True)
class WangEncoding:
    """Tile set of a domino SFT.

    The color on a vertical edge is the class of the symbol to its left, where
    two symbols share a class when they allow the same right neighbours
    (likewise for horizontal edges and upper neighbours). Tile (b, l, d) shows
    b and fits above class d and right of class l whenever those classes allow
    b, so a tiling is determined by its symbols. Free regions pin their left and
    bottom outer edges to the permissive class ``edge_colors`` (see ``region``).
    """

    tileset: TileSet
    alphabet: Alphabet
    symbol_of: tuple  # tile index -> symbol index
    edge_colors: tuple  # (left boundary color, bottom boundary color)

    def region(self, width: int, height: int, wrap: str = "free") -> Region:
        if wrap == "torus":
            return Region(width, height, "torus")
        b = {("left", y): self.edge_colors[0] for y in range(height)}
        b.update({("bottom", x): self.edge_colors[1] for x in range(width)})
        return Region(width, height, "free", b)

    def configuration(self, t: Tiling) -> Pattern:
        rows = [[self.alphabet.symbols[self.symbol_of[t.at(x, y)]] for x in range(t.region.width)]
                for y in range(t.region.height)]
        return Pattern.from_rows(self.alphabet, rows)


def recode_to_dominoes(F: ForbiddenSet, cap: int = 1 << 12):
    """Higher-block presentation: symbols = admissible boxes spanning F's patterns,
    forbidden dominoes = overlapping pairs that disagree."""
    from .core import enumerate_admissible

    if F.dimension != 2:
        raise ConversionError("only 2D forbidden sets convert to Wang tiles", module=MODULE)
    w = max(p.window.width for p in F)
    h = max(p.window.height for p in F)
    boxes = enumerate_admissible(F, Window.rectangle(w, h), cap=cap)
    if not boxes:
        raise ConversionError("no admissible box: the tile set would be empty", module=MODULE)
    names = tuple(f"B{i}" for i in range(len(boxes)))
    alph = Alphabet(names)
    forb = []
    for i, p in enumerate(boxes):
        pc = p.cells
        for j, q in enumerate(boxes):
            qc = q.cells
            if not all(pc[(x + 1, y)] == qc[(x, y)] for x in range(w - 1) for y in range(h)):
                forb.append(Pattern.from_rows(alph, [[names[i], names[j]]]))
            if not all(pc[(x, y + 1)] == qc[(x, y)] for x in range(w) for y in range(h - 1)):
                forb.append(Pattern.from_rows(alph, [[names[i]], [names[j]]]))
    return boxes, ForbiddenSet(alph, tuple(forb))


def _is_domino(p: Pattern) -> bool:
    return p.window.is_box and (p.window.width, p.window.height) in ((1, 1), (2, 1), (1, 2))


def _classes(syms, bad, prefix):
    """Per-symbol color (index of its allowed-successor set), the set each color
    allows, and the permissive color used on the outer boundary."""
    succ = {a: frozenset(b for b in syms if (a, b) not in bad) for a in syms}
    index = {st: i for i, st in enumerate(dict.fromkeys(succ[a] for a in syms))}
    of = {a: color(f"{prefix}{index[succ[a]]}") for a in syms}
    return of, succ


def _edge_color(allows: dict, syms, prefix):
    everything = frozenset(syms)
    for c, st in allows.items():
        if st == everything:
            return c
    allows[color(f"{prefix}*")] = everything
    return color(f"{prefix}*")


def sft_to_wang(F: ForbiddenSet) -> WangEncoding:
    """Wang tiles whose tilings (free regions with the edge colors pinned, or tori)
    are in bijection with configurations avoiding the forbidden dominoes."""
    if F.dimension not in (None, 2):
        raise ConversionError("only 2D forbidden sets convert to Wang tiles", module=MODULE)
    if len(F) and not all(_is_domino(p) for p in F):
        raise ConversionError("forbidden patterns must be dominoes or single cells; "
                              "use recode_to_dominoes first", module=MODULE)
    S = F.alphabet
    banned = {p.values[0] for p in F if len(p.window) == 1}
    syms = [a for a in range(len(S)) if a not in banned]
    if not syms:
        raise ConversionError("every symbol is forbidden: the tile set is empty", module=MODULE)
    h_bad = {(p.cells[(0, 0)], p.cells[(1, 0)]) for p in F if p.window.width == 2}
    v_bad = {(p.cells[(0, 0)], p.cells[(0, 1)]) for p in F if p.window.height == 2}
    h_of, h_succ = _classes(syms, h_bad, "h")
    v_of, v_succ = _classes(syms, v_bad, "v")
    # symbols with the same pair of classes would give identical tiles: split their
    # vertical color so every tile still names its symbol
    groups = defaultdict(list)
    for a in syms:
        groups[(h_of[a], v_of[a])].append(a)
    for members in groups.values():
        if len(members) > 1:
            for k, a in enumerate(members):
                v_of[a] = color(f"{v_of[a]}.{k}")
    h_allows = {h_of[a]: h_succ[a] for a in syms}
    v_allows = {v_of[a]: v_succ[a] for a in syms}
    h_edge = _edge_color(h_allows, syms, "h")
    v_edge = _edge_color(v_allows, syms, "v")
    tiles, names, symbol_of = [], [], []
    for b in syms:
        for lc, lset in h_allows.items():
            if b not in lset:
                continue
            for dc, dset in v_allows.items():
                if b in dset:
                    tiles.append(Tile(left=lc, right=h_of[b], top=v_of[b], bottom=dc))
                    names.append(f"{S.symbols[b]}|{lc}|{dc}")
                    symbol_of.append(b)
    return WangEncoding(TileSet(tuple(tiles), tuple(names)), S, tuple(symbol_of), (h_edge, v_edge))
