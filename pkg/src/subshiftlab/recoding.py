"""Block recoding: grouping a configuration into m-blocks (m x m squares in 2D).

The block alphabet T consists of all patterns of the base alphabet on the
block window; a block symbol is named by its cells in row-major order
(joined directly for single-character alphabets, with '.' otherwise).
Grouping is a conjugacy between the block shift on the base configurations
and the full shift on T. So entropy and pressure scale by the block volume.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Alphabet, Pattern, Window
from .errors import AlignmentError, CapExceeded, ContractViolation, DomainError
from .gibbs import DEFAULT_MATRIX_CAP, Geometry, Potential, _digits, pressure

MODULE = "recoding"
BLOCK_ALPHABET_CAP = 1 << 16


@dataclass(frozen=True)
class BlockCode:
    base: Alphabet
    m: int
    dimension: int = 1

    def __post_init__(self):
        if self.m < 1 or self.dimension not in (1, 2):
            raise ContractViolation("block size must be >= 1 and dimension 1 or 2", module=MODULE)
        if len(self.base) ** self.volume > BLOCK_ALPHABET_CAP:
            raise CapExceeded(f"block alphabet would have {len(self.base) ** self.volume} symbols",
                              cap=BLOCK_ALPHABET_CAP, module=MODULE)

    @property
    def volume(self) -> int:
        return self.m ** self.dimension

    @property
    def window(self) -> Window:
        return Window.segment(self.m) if self.dimension == 1 else Window.rectangle(self.m, self.m)

    def name(self, values) -> str:
        sep = "" if self.base.single_char else "."
        return sep.join(self.base.symbols[v] for v in values)

    @cached_property
    def alphabet(self) -> Alphabet:
        k = len(self.base)
        return Alphabet(tuple(self.name(vals) for vals in itertools.product(range(k), repeat=self.volume)))

    def block_index(self, values) -> int:
        code = 0
        for v in values:
            code = code * len(self.base) + v
        return code

    def block_values(self, index: int) -> tuple:
        k, out = len(self.base), []
        for _ in range(self.volume):
            index, d = divmod(index, k)
            out.append(d)
        return tuple(reversed(out))


def _box(x: Pattern):
    if not x.window.is_box:
        raise AlignmentError("recoding needs a box-shaped window", module=MODULE)
    return x.window.width, x.window.height


def recode_forward(x: Pattern, code: BlockCode) -> Pattern:
    """Group ``x`` into non-overlapping blocks; the result lives on the block grid."""
    if x.alphabet != code.base or x.dimension != code.dimension:
        raise ContractViolation("pattern does not match the block code", module=MODULE)
    w, h = _box(x)
    m = code.m
    if w % m or (code.dimension == 2 and h % m):
        raise AlignmentError(f"window {w}x{h} is not a multiple of the block size {m}", module=MODULE)
    cells = x.cells
    if code.dimension == 1:
        blocks = [code.block_index([cells[(i * m + t,)] for t in range(m)]) for i in range(w // m)]
        return Pattern(code.alphabet, Window.segment(w // m), tuple(blocks))
    grid = Window.rectangle(w // m, h // m)
    blocks = []
    for (bx, by) in grid.ordered:
        vals = [cells[(bx * m + px, by * m + py)] for (px, py) in code.window.ordered]
        blocks.append(code.block_index(vals))
    return Pattern(code.alphabet, grid, tuple(blocks))


def recode_backward(y: Pattern, code: BlockCode) -> Pattern:
    if y.alphabet != code.alphabet or y.dimension != code.dimension:
        raise ContractViolation("pattern is not over the block alphabet", module=MODULE)
    w, h = _box(y)
    m = code.m
    if code.dimension == 1:
        vals = [v for b in y.values for v in code.block_values(b)]
        return Pattern(code.base, Window.segment(w * m), tuple(vals))
    cells = {}
    for (bx, by), b in y.cells.items():
        for (px, py), v in zip(code.window.ordered, code.block_values(b)):
            cells[(bx * m + px, by * m + py)] = v
    win = Window.rectangle(w * m, h * m)
    return Pattern(code.base, win, tuple(cells[p] for p in win.ordered))


def block_entropy(P) -> float:
    """Entropy log|P| of the full shift over the block set P (duplicates ignored)."""
    n = len(set(P))
    if n == 0:
        raise DomainError("block set must be nonempty", module=MODULE)
    return math.log(n)


def block_potential(p: Potential, m: int) -> Potential:
    """Birkhoff sum S_m p as a potential over the m-block alphabet (1D)."""
    if p.dimension != 1:
        raise ContractViolation("block potentials are built for 1D chains", module=MODULE)
    k, w = len(p.alphabet), len(p.window)
    nb = -(-(m - 1 + w) // m)  # blocks needed to see every window starting in block 0
    size = k ** (m * nb)
    if size > DEFAULT_MATRIX_CAP:
        raise CapExceeded(f"block potential needs {size} entries", cap=DEFAULT_MATRIX_CAP,
                          module=MODULE)
    digits = _digits(size, m * nb, k)
    table = np.zeros(size)
    for i in range(m):
        code = np.zeros(size, dtype=np.int64)
        for t in range(w):
            code = code * k + digits[:, i + t]
        with np.errstate(invalid="ignore"):
            table = table + p.table[code]
    code = BlockCode(p.alphabet, m, 1)
    # a block word's index over T equals its base-k code, so the table carries over unchanged
    return Potential(code.alphabet, Window.segment(nb), table)


@dataclass(frozen=True)
class ScalingReport:
    m: int
    beta: float
    base_pressure: float
    block_pressure: float
    tol: float = 1e-8

    @property
    def ratio(self) -> float:
        return self.block_pressure / self.base_pressure if self.base_pressure else math.nan

    @property
    def defect(self) -> float:
        return abs(self.block_pressure - self.m * self.base_pressure)

    @property
    def holds(self) -> bool:
        return self.defect <= self.tol * max(1.0, abs(self.m * self.base_pressure))


def pressure_scaling_check(p: Potential, beta: float, m: int, symbol_weights=None,
                           tol: float = 1e-8) -> ScalingReport:
    """Compare the pressure of S_m p under the m-block shift with m times the base pressure."""
    if m < 1:
        raise DomainError("block size must be >= 1", module=MODULE)
    base = pressure(p, beta, Geometry.chain(), symbol_weights)
    bp = block_potential(p, m)
    bw = None
    if symbol_weights is not None:
        sw = np.asarray(symbol_weights, dtype=float)
        bw = [float(np.prod(sw[list(BlockCode(p.alphabet, m).block_values(i))]))
              for i in range(len(bp.alphabet))]
    block = pressure(bp, beta, Geometry.chain(), bw)
    return ScalingReport(m, beta, base.pressure, block.pressure, tol)
