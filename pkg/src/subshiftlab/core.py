"""Lattice patterns and forbidden-set subshifts on finite windows (d = 1, 2).

Patterns are stored in the translate whose coordinate-wise minimum is the
origin, so congruence of patterns is plain equality. Points of a window are
ordered row-major (by ``(y, x)`` in 2D), and a pattern keeps its symbol
indices in that order.

Occurrence means full containment: a forbidden pattern that would stick out
of the host window is not an occurrence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ContractViolation, CountingOverflow, EnumerationOverflow, ParseError

DEFAULT_ENUM_CAP = 1 << 22
DEFAULT_STATE_CAP = 1 << 20

Point = tuple


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ContractViolation("alphabet must be nonempty", module="symbolic-core")
        if len(set(symbols)) != len(symbols):
            raise ContractViolation(f"duplicate symbol names in {symbols}", module="symbolic-core")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def index(self, symbol) -> int:
        try:
            return self._index[str(symbol)]
        except KeyError:
            raise ContractViolation(f"symbol {symbol!r} not in alphabet {self.symbols}",
                                    module="symbolic-core") from None

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, symbol):
        return str(symbol) in self._index

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)


def _row_major_key(p):
    return tuple(reversed(p))


@dataclass(frozen=True)
class Window:
    dimension: int
    points: frozenset

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ContractViolation(f"dimension must be 1 or 2, got {self.dimension}",
                                    module="symbolic-core")
        pts = [tuple(int(c) for c in p) for p in self.points]
        if not pts:
            raise ContractViolation("window must be nonempty", module="symbolic-core")
        if any(len(p) != self.dimension for p in pts):
            raise ContractViolation("point dimension does not match window dimension",
                                    module="symbolic-core")
        mins = [min(p[i] for p in pts) for i in range(self.dimension)]
        canon = frozenset(tuple(c - m for c, m in zip(p, mins)) for p in pts)
        object.__setattr__(self, "points", canon)

    @classmethod
    def segment(cls, length: int) -> "Window":
        return cls(1, frozenset((i,) for i in range(length)))

    @classmethod
    def rectangle(cls, width: int, height: int) -> "Window":
        return cls(2, frozenset((x, y) for y in range(height) for x in range(width)))

    @classmethod
    def cube(cls, n: int, d: int) -> "Window":
        """The centred cube {-n+1..n-1}^d (stored canonically)."""
        side = 2 * n - 1
        return cls.segment(side) if d == 1 else cls.rectangle(side, side)

    @classmethod
    def cross(cls) -> "Window":
        return cls(2, frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}))

    @cached_property
    def ordered(self) -> tuple:
        return tuple(sorted(self.points, key=_row_major_key))

    @cached_property
    def position(self) -> dict:
        return {p: i for i, p in enumerate(self.ordered)}

    @property
    def width(self) -> int:
        return 1 + max(p[0] for p in self.points)

    @property
    def height(self) -> int:
        return 1 if self.dimension == 1 else 1 + max(p[1] for p in self.points)

    @property
    def is_box(self) -> bool:
        return len(self.points) == self.width * self.height

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Pattern:
    alphabet: Alphabet
    window: Window
    values: tuple  # symbol indices, in window.ordered order

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != len(self.window):
            raise ContractViolation("pattern must assign exactly one symbol per window point",
                                    module="symbolic-core")
        if any(v < 0 or v >= len(self.alphabet) for v in vals):
            raise ContractViolation("symbol index out of range", module="symbolic-core")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols: Sequence) -> "Pattern":
        """1D pattern from a sequence of symbols; a plain str is split per character
        when every symbol name is a single character."""
        if isinstance(symbols, str):
            symbols = list(symbols) if alphabet.single_char else symbols.split()
        return cls(alphabet, Window.segment(len(symbols)), tuple(alphabet.index(s) for s in symbols))

    @classmethod
    def from_rows(cls, alphabet: Alphabet, rows: Sequence[Sequence]) -> "Pattern":
        """2D box pattern; ``rows[y][x]`` with ``rows[0]`` the bottom row."""
        rows = [list(r) if not isinstance(r, str) or alphabet.single_char else r.split() for r in rows]
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ContractViolation("ragged rows", module="symbolic-core")
        window = Window.rectangle(width, len(rows))
        return cls(alphabet, window, tuple(alphabet.index(rows[y][x]) for (x, y) in window.ordered))

    @classmethod
    def from_cells(cls, alphabet: Alphabet, cells: dict, dimension: int) -> "Pattern":
        window = Window(dimension, frozenset(cells))
        mins = [min(p[i] for p in cells) for i in range(dimension)]
        shifted = {tuple(c - m for c, m in zip(p, mins)): alphabet.index(s) for p, s in cells.items()}
        return cls(alphabet, window, tuple(shifted[p] for p in window.ordered))

    @property
    def dimension(self) -> int:
        return self.window.dimension

    @cached_property
    def cells(self) -> dict:
        return dict(zip(self.window.ordered, self.values))

    def symbol_at(self, point) -> str:
        return self.alphabet.symbols[self.cells[tuple(point)]]

    @property
    def symbols(self) -> tuple:
        return tuple(self.alphabet.symbols[v] for v in self.values)

    def rows(self) -> list:
        w, h = self.window.width, self.window.height
        if self.dimension == 1:
            return [[self.symbol_at((x,)) if (x,) in self.cells else None for x in range(w)]]
        return [[self.symbol_at((x, y)) if (x, y) in self.cells else None for x in range(w)]
                for y in range(h)]

    def __str__(self):
        sep = "" if self.alphabet.single_char else " "
        return ";".join(sep.join("." if s is None else s for s in row) for row in self.rows())


def _check_compatible(p: Pattern, q: Pattern):
    if p.alphabet != q.alphabet:
        raise ContractViolation("patterns are over different alphabets", module="symbolic-core")
    if p.dimension != q.dimension:
        raise ContractViolation(
            f"dimension mismatch: {p.dimension}D pattern vs {q.dimension}D pattern",
            module="symbolic-core")


def occurrences(p: Pattern, q: Pattern) -> list:
    """Offsets at which p sits fully inside q with matching symbols."""
    _check_compatible(p, q)
    anchor = p.window.ordered[0]
    qcells = q.cells
    found = []
    for qp in q.window.ordered:
        off = tuple(a - b for a, b in zip(qp, anchor))
        for pt, v in p.cells.items():
            tgt = tuple(a + b for a, b in zip(pt, off))
            if qcells.get(tgt, -1) != v:
                break
        else:
            found.append(off)
    return found


def occurs_in(p: Pattern, q: Pattern) -> bool:
    _check_compatible(p, q)
    if p.dimension == 1 and p.window.is_box and q.window.is_box:
        a, b, n = p.values, q.values, len(p.values)
        return any(b[i:i + n] == a for i in range(len(b) - n + 1))
    return bool(occurrences(p, q))


@dataclass(frozen=True)
class ForbiddenSet:
    alphabet: Alphabet
    patterns: tuple = ()

    def __post_init__(self):
        seen, unique = set(), []
        for p in self.patterns:
            if p.alphabet != self.alphabet:
                raise ContractViolation("forbidden pattern over a different alphabet",
                                        module="symbolic-core")
            if p not in seen:
                seen.add(p)
                unique.append(p)
        dims = {p.dimension for p in unique}
        if len(dims) > 1:
            raise ContractViolation("forbidden patterns of mixed dimension", module="symbolic-core")
        object.__setattr__(self, "patterns", tuple(unique))

    @classmethod
    def from_strings(cls, alphabet: Alphabet, strings: Iterable) -> "ForbiddenSet":
        return cls(alphabet, tuple(Pattern.from_symbols(alphabet, s) for s in strings))

    @property
    def dimension(self):
        return self.patterns[0].dimension if self.patterns else None

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def issubset(self, other: "ForbiddenSet") -> bool:
        return set(self.patterns) <= set(other.patterns)


def locally_admissible(omega: Pattern, forbidden: ForbiddenSet) -> bool:
    if omega.alphabet != forbidden.alphabet:
        raise ContractViolation("pattern and forbidden set use different alphabets",
                                module="symbolic-core")
    return not any(occurs_in(p, omega) for p in forbidden)


def _placements(forbidden: ForbiddenSet, shape: Window):
    """For each shape position, the forbidden placements completed there."""
    pos = shape.position
    checks = [[] for _ in range(len(shape))]
    for p in forbidden:
        anchor = p.window.ordered[0]
        for sp in shape.ordered:
            off = tuple(a - b for a, b in zip(sp, anchor))
            cells = []
            for pt, v in p.cells.items():
                tgt = tuple(a + b for a, b in zip(pt, off))
                if tgt not in pos:
                    break
                cells.append((pos[tgt], v))
            else:
                checks[max(i for i, _ in cells)].append(tuple(cells))
    return checks


def enumerate_admissible(forbidden: ForbiddenSet, shape: Window, cap: int = DEFAULT_ENUM_CAP) -> list:
    """All shape-patterns with no forbidden occurrence, in lexicographic order of
    symbol indices read row-major. Raises EnumerationOverflow past ``cap`` results."""
    if forbidden.dimension not in (None, shape.dimension):
        raise ContractViolation("forbidden set and shape differ in dimension", module="symbolic-core")
    alphabet = forbidden.alphabet
    checks = _placements(forbidden, shape)
    n, s = len(shape), len(alphabet)
    out = []
    word = [0] * n

    def extend(i):
        if i == n:
            if len(out) >= cap:
                raise EnumerationOverflow(f"more than {cap} admissible patterns (cap {cap})",
                                          cap=cap, partial=len(out), module="symbolic-core")
            out.append(Pattern(alphabet, shape, tuple(word)))
            return
        for a in range(s):
            word[i] = a
            if all(any(word[j] != v for j, v in cells) for cells in checks[i]):
                extend(i + 1)

    extend(0)
    return out


def count_admissible_dp(forbidden: ForbiddenSet, length: int, state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Exact number of admissible 1D strings of the given length.

    Dynamic programming over the sliding-window automaton whose states are the
    last w-1 symbols, w being the longest forbidden span.
    """
    if forbidden.dimension == 2:
        raise ContractViolation("count_admissible_dp handles 1D forbidden sets only",
                                module="symbolic-core")
    s = len(forbidden.alphabet)
    if length <= 0:
        return 1 if length == 0 else 0
    if not forbidden.patterns:
        return s ** length
    rules = []
    for p in forbidden:
        span = p.window.width
        rules.append((span, tuple((pt[0] - span, v) for pt, v in p.cells.items())))
    w = max(span for span, _ in rules)
    if s ** (w - 1) > state_cap:
        raise CountingOverflow(f"automaton needs {s}^{w - 1} states, above cap {state_cap}",
                               cap=state_cap, module="symbolic-core")
    keep = w - 1
    counts = {(): 1}
    for _ in range(length):
        nxt = {}
        for state, c in counts.items():
            for a in range(s):
                tail = state + (a,)
                bad = False
                for span, cells in rules:
                    if span <= len(tail) and all(tail[j] == v for j, v in cells):
                        bad = True
                        break
                if bad:
                    continue
                key = tail[-keep:] if keep else ()
                nxt[key] = nxt.get(key, 0) + c
        counts = nxt
    return sum(counts.values())


# -- text format -----------------------------------------------------------

def parse_patterns(text: str):
    """Parse the line format ``alphabet a b ...`` / ``pat WxH row;row;...``.

    Symbols within a row are space separated; rows are listed bottom row first.
    An optional ``dim 1|2`` line fixes the dimension, otherwise patterns are 1D
    when every height is 1.
    """
    alphabet, dim, raw = None, None, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "alphabet":
            if alphabet is not None:
                raise ParseError("second alphabet line", lineno, module="symbolic-core")
            try:
                alphabet = Alphabet(tuple(rest.split()))
            except ContractViolation as exc:
                raise ParseError(str(exc), lineno, module="symbolic-core") from None
        elif head == "dim":
            dim = int(rest)
        elif head == "pat":
            if alphabet is None:
                raise ParseError("pattern before alphabet line", lineno, module="symbolic-core")
            size, _, body = rest.strip().partition(" ")
            try:
                w, h = (int(v) for v in size.lower().split("x"))
            except ValueError:
                raise ParseError(f"bad size {size!r}", lineno, module="symbolic-core") from None
            rows = [r.split() for r in body.split(";")]
            if len(rows) != h or any(len(r) != w for r in rows):
                raise ParseError(f"pattern body does not match size {w}x{h}", lineno,
                                 module="symbolic-core")
            for r in rows:
                for sym in r:
                    if sym not in alphabet:
                        raise ParseError(f"unknown symbol {sym!r}", lineno, module="symbolic-core")
            raw.append((lineno, rows))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, module="symbolic-core")
    if alphabet is None:
        raise ParseError("missing alphabet line", module="symbolic-core")
    if dim is None:
        dim = 1 if all(len(rows) == 1 for _, rows in raw) else 2
    patterns = []
    for lineno, rows in raw:
        if dim == 1:
            if len(rows) != 1:
                raise ParseError("1D pattern must have height 1", lineno, module="symbolic-core")
            patterns.append(Pattern.from_symbols(alphabet, rows[0]))
        else:
            patterns.append(Pattern.from_rows(alphabet, rows))
    return ForbiddenSet(alphabet, tuple(patterns))


def format_patterns(fs: ForbiddenSet, dimension: int | None = None) -> str:
    lines = ["alphabet " + " ".join(fs.alphabet.symbols)]
    dim = dimension or fs.dimension
    if dim == 2:
        lines.append("dim 2")
    for p in fs:
        rows = p.rows()
        if any(s is None for row in rows for s in row):
            raise ContractViolation("text format holds box patterns only", module="symbolic-core")
        lines.append(f"pat {p.window.width}x{p.window.height} " + ";".join(" ".join(r) for r in rows))
    return "\n".join(lines) + "\n"
