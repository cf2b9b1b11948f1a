"""Locally constant potentials and their equilibrium states on chains and strips.

A potential is a table over the patterns of a finite window. On a 1D chain
(or a 2D strip of height h, periodic vertically) it becomes a transfer
matrix over blocks of columns. The pressure is the log of the Perron root,
and the equilibrium state is the Markov measure built from the left and right
Perron vectors.

Everything is kept in the log domain: edge weights are ``beta * energy +
log(multiplicity)``, and the power iteration normalises by log-sum-exp. This
keeps beta in the hundreds or thousands free of underflow. Hard constraints
are written as ``-inf`` energies and never mix with beta.

Transfer structure: with C = |alphabet|^h column values and n state columns,
state s = (c_1..c_n) moves to (c_2..c_n, c) along edge ``e = s*C + c``. So
the out-edges of s form row s of ``w.reshape(N, C)``, and the in-edges of t
are the edges ``e = t (mod N)``, i.e. column t of ``w.reshape(C, N)``. Both
iteration steps are dense reshapes; no sparse matrix is needed.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Alphabet, ForbiddenSet, Pattern, Window
from .errors import (CapExceeded, ContractViolation, ConversionError, ConvergenceError, DomainError,
                     InapplicableError, ParseError, ReducibilityError)

MODULE = "gibbs"
DEFAULT_MATRIX_CAP = 1 << 22
DEFAULT_TOL = 1e-12
VARIATIONAL_TOL = 1e-8
MAX_ITER = 200_000
DENSE_LIMIT = 2048


# -- potentials and interactions ---------------------------------------------


def _codes_of(alphabet: Alphabet, window: Window, values) -> int:
    code = 0
    for v in values:
        code = code * len(alphabet) + v
    return code


@dataclass(frozen=True, eq=False)
class Potential:
    """Energy table over all patterns of ``window``; index = symbol indices in
    row-major window order read as a base-|alphabet| number (first point most
    significant)."""

    alphabet: Alphabet
    window: Window
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.shape != (len(self.alphabet) ** len(self.window),):
            raise ContractViolation("potential table must cover every window pattern", module=MODULE)
        if np.isnan(table).any() or (table == np.inf).any():
            raise ContractViolation("potential values must be finite or -inf", module=MODULE)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def zero(cls, alphabet: Alphabet, window: Window | None = None) -> "Potential":
        window = window or Window.segment(1)
        return cls(alphabet, window, np.zeros(len(alphabet) ** len(window)))

    @classmethod
    def from_function(cls, alphabet: Alphabet, window: Window, fn) -> "Potential":
        """``fn`` receives a Pattern on the window and returns its energy."""
        size = len(alphabet) ** len(window)
        if size > DEFAULT_MATRIX_CAP:
            raise CapExceeded(f"window has {size} patterns", cap=DEFAULT_MATRIX_CAP, module=MODULE)
        table = [fn(Pattern(alphabet, window, vals))
                 for vals in itertools.product(range(len(alphabet)), repeat=len(window))]
        return cls(alphabet, window, np.array(table, dtype=float))

    @property
    def dimension(self) -> int:
        return self.window.dimension

    def value(self, pattern: Pattern) -> float:
        if pattern.window != self.window or pattern.alphabet != self.alphabet:
            raise ContractViolation("pattern does not live on the potential's window", module=MODULE)
        return float(self.table[_codes_of(self.alphabet, self.window, pattern.values)])

    def __eq__(self, other):
        return (isinstance(other, Potential) and self.alphabet == other.alphabet
                and self.window == other.window and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.alphabet, self.window, self.table.tobytes()))

    @property
    def has_hard_constraints(self) -> bool:
        return bool(np.isneginf(self.table).any())


@dataclass(frozen=True)
class Interaction:
    """Finite list of shift-invariant terms, each an energy map on one window shape."""

    alphabet: Alphabet
    dimension: int
    terms: tuple = ()  # (Window, {values tuple: energy})

    @property
    def range(self) -> int:
        return max((max(w.width, w.height) for w, _ in self.terms), default=0)

    def energy(self, window: Window, pattern: Pattern) -> float:
        return sum(table.get(pattern.values, 0.0) for w, table in self.terms if w == window)


def _single_shape(F: ForbiddenSet) -> Window:
    shapes = {p.window for p in F}
    if len(shapes) != 1:
        raise ConversionError(f"forbidden patterns must share one window shape, found {len(shapes)}",
                              module=MODULE)
    return next(iter(shapes))


def interaction_from_forbidden(F: ForbiddenSet) -> Interaction:
    """Energy -|window| on every forbidden pattern, 0 otherwise."""
    if len(F) == 0:
        return Interaction(F.alphabet, F.dimension or 1, ())
    w = _single_shape(F)
    return Interaction(F.alphabet, w.dimension, ((w, {p.values: -float(len(w)) for p in F}),))


def potential_direct(F: ForbiddenSet, window: Window | None = None) -> Potential:
    """-1 on the forbidden patterns, 0 on every admissible window."""
    if len(F) == 0:
        return Potential.zero(F.alphabet, window)
    w = _single_shape(F)
    table = np.zeros(len(F.alphabet) ** len(w))
    for p in F:
        table[_codes_of(F.alphabet, w, p.values)] = -1.0
    return Potential(F.alphabet, w, table)


def potential_from_interaction(phi: Interaction) -> Potential:
    """Per-site potential sum over terms containing the origin of energy/|window|.

    The table lives on the union of all translates of every term window that
    contain the origin.
    """
    if not phi.terms:
        return Potential.zero(phi.alphabet, Window.segment(1) if phi.dimension == 1
                              else Window.rectangle(1, 1))
    translates = []  # (term window, offset p): the copy shifted by -p covers the origin
    union = set()
    for w, table in phi.terms:
        for p in w.points:
            pts = [tuple(a - b for a, b in zip(q, p)) for q in w.ordered]
            translates.append((w, table, pts))
            union.update(pts)
    mins = [min(q[i] for q in union) for i in range(phi.dimension)]
    shift = lambda q: tuple(a - m for a, m in zip(q, mins))
    U = Window(phi.dimension, frozenset(shift(q) for q in union))
    pos = U.position
    n = len(U)
    k = len(phi.alphabet)
    size = k ** n
    if size > DEFAULT_MATRIX_CAP:
        raise CapExceeded(f"union window has {size} patterns", cap=DEFAULT_MATRIX_CAP, module=MODULE)
    digits = _digits(size, n, k)
    energy = np.zeros(size)
    for w, table, pts in translates:
        idx = [pos[shift(q)] for q in pts]
        code = np.zeros(size, dtype=np.int64)
        for i in idx:
            code = code * k + digits[:, i]
        for vals, e in table.items():
            energy[code == _codes_of(phi.alphabet, w, vals)] += e / len(w)
    return Potential(phi.alphabet, U, energy)


def _digits(size: int, n: int, k: int) -> np.ndarray:
    """Row c holds the base-k digits of c, most significant first."""
    codes = np.arange(size, dtype=np.int64)
    out = np.empty((size, n), dtype=np.int8 if k < 128 else np.int32)
    for i in range(n - 1, -1, -1):
        out[:, i] = codes % k
        codes //= k
    return out


# -- geometry and transfer operator -------------------------------------------


@dataclass(frozen=True)
class Geometry:
    """``chain`` (h = 1, 1D potentials) or a strip of height h (2D, periodic vertically)."""

    kind: str = "chain"
    height: int = 1

    @classmethod
    def chain(cls):
        return cls("chain", 1)

    @classmethod
    def strip(cls, h: int):
        if h < 1:
            raise DomainError("strip height must be positive", module=MODULE)
        return cls("strip", h)

    @classmethod
    def parse(cls, text: str) -> "Geometry":
        if text == "chain":
            return cls.chain()
        if text.startswith("strip:"):
            return cls.strip(int(text.split(":", 1)[1]))
        raise DomainError(f"geometry must be 'chain' or 'strip:H', got {text!r}", module=MODULE)

    def __str__(self):
        return "chain" if self.kind == "chain" else f"strip:{self.height}"


def _logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(x, axis=axis)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum(np.exp(x - np.expand_dims(safe, axis)), axis=axis)
        return np.log(s) + safe


@dataclass
class TransferOperator:
    alphabet: Alphabet
    height: int
    n_cols: int             # columns per state
    C: int                  # column values
    N: int                  # states
    energy: np.ndarray      # per edge, summed over the h rows of the new column(s)
    logmult: np.ndarray     # per edge, log multiplicity of the new column
    edge_cols: int          # columns spanned by an edge

    @property
    def n_edges(self) -> int:
        return self.N * self.C

    def edge_digits(self) -> np.ndarray:
        """(edges, edge_cols, h) array of symbol indices; column 0 is the oldest."""
        k = len(self.alphabet)
        d = _digits(self.n_edges, self.edge_cols * self.height, k)
        return d.reshape(self.n_edges, self.edge_cols, self.height)

    def log_weights(self, beta: float) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            w = np.where(np.isneginf(self.energy), -np.inf, beta * np.where(
                np.isneginf(self.energy), 0.0, self.energy))
        return w + self.logmult


def build_transfer(p: Potential, geometry: Geometry = Geometry(), symbol_weights=None,
                   cap: int = DEFAULT_MATRIX_CAP) -> TransferOperator:
    """Transfer operator of ``p`` on the geometry; ``symbol_weights`` are a-priori
    multiplicities (e.g. 2 for a doubled symbol)."""
    k = len(p.alphabet)
    h = geometry.height
    win = p.window
    if geometry.kind == "chain":
        if win.dimension != 1:
            raise ContractViolation("chain geometry needs a 1D potential", module=MODULE)
        pts = [(q[0], 0) for q in win.ordered]
    else:
        if win.dimension != 2:
            raise ContractViolation("strip geometry needs a 2D potential", module=MODULE)
        if win.height > h:
            raise ContractViolation(f"window height {win.height} exceeds strip height {h}",
                                    module=MODULE)
        pts = list(win.ordered)
    mx = 1 + max(x for x, _ in pts)
    n_cols = max(mx - 1, 1)
    L = n_cols + 1
    C = k ** h
    N = C ** n_cols
    if N * C > cap:
        raise CapExceeded(f"transfer matrix needs {N * C} edges (cap {cap})", cap=cap, module=MODULE)
    digits = _digits(N * C, L * h, k).reshape(N * C, L, h)
    off = L - mx  # the window occupies the last mx columns of an edge
    energy = np.zeros(N * C)
    for y0 in range(h):
        code = np.zeros(N * C, dtype=np.int64)
        for x, y in pts:
            code = code * k + digits[:, off + x, (y + y0) % h]
        energy += p.table[code]
    weights = np.ones(k) if symbol_weights is None else np.asarray(symbol_weights, dtype=float)
    if weights.shape != (k,) or (weights < 0).any():
        raise ContractViolation("symbol weights must be one nonnegative number per symbol",
                                module=MODULE)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    logmult = logw[digits[:, L - 1, :]].sum(axis=1)
    return TransferOperator(p.alphabet, h, n_cols, C, N, energy, logmult, L)


# -- Perron data ---------------------------------------------------------------


def _apply_right(logw, logr, N, C):
    dst = (np.arange(N * C) % N).reshape(N, C)
    return _logsumexp(logw.reshape(N, C) + logr[dst], axis=1)


def _apply_left(logw, logl, N, C):
    src = (np.arange(N * C) // C).reshape(C, N)
    return _logsumexp(logw.reshape(C, N) + logl[src], axis=0)


def _classes(logw, N, C):
    """Strongly connected classes of the support graph that carry a cycle."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    e = np.nonzero(np.isfinite(logw))[0]
    src, dst = e // C, e % N
    g = csr_matrix((np.ones(len(e)), (src, dst)), shape=(N, N))
    _, labels = connected_components(g, directed=True, connection="strong")
    same = labels[src] == labels[dst]
    cyclic = np.unique(labels[src[same]])
    return [np.nonzero(labels == c)[0] for c in cyclic], labels


def _period(logw, members, N, C):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    inside = np.zeros(N, dtype=bool)
    inside[members] = True
    e = np.nonzero(np.isfinite(logw))[0]
    src, dst = e // C, e % N
    keep = inside[src] & inside[dst]
    src, dst = src[keep], dst[keep]
    g = csr_matrix((np.ones(len(src)), (src, dst)), shape=(N, N))
    dist = shortest_path(g, unweighted=True, indices=int(members[0]))
    d = (dist[src] + 1 - dist[dst]).astype(np.int64)
    return int(np.gcd.reduce(np.abs(d))) if len(d) else 0


def _warm_start(logw, N, C, left: bool):
    """Perron vector guess from a direct eigensolver on the rescaled matrix: dense
    LAPACK for small state spaces, ARPACK otherwise (None if unusable).

    A good start matters when the spectral gap is tiny (large beta, nearly
    reducible weights), where plain power iteration crawls.
    """
    try:
        from scipy.sparse import csr_matrix
        from scipy.sparse.linalg import eigs

        top = np.max(logw[np.isfinite(logw)])
        with np.errstate(under="ignore"):
            vals = np.exp(logw - top)
        e = np.nonzero(vals > 0)[0]
        M = csr_matrix((vals[e], (e // C, e % N)), shape=(N, N))
        if N <= DENSE_LIMIT:
            w, vecs = np.linalg.eig((M.T if left else M).toarray())
            vec = vecs[:, [int(np.argmax(w.real))]]
        else:
            # fixed start vector: ARPACK's default is random, which breaks reproducibility
            v0 = np.full(N, 1.0 / np.sqrt(N))
            _, vec = eigs(M.T if left else M, k=1, which="LM", tol=1e-10, maxiter=5000, v0=v0)
        v = np.abs(vec[:, 0].real)
        if not np.all(np.isfinite(v)) or v.max() <= 0:
            return None
        with np.errstate(divide="ignore"):
            lv = np.log(v / v.max())
        return np.maximum(lv, -700.0)
    except Exception:  # ARPACK failures only cost us the warm start
        return None


def _power(logw, N, C, apply, start, tol, max_iter, lazy: bool):
    v = np.zeros(N) if start is None else start.copy()
    lam = None
    shift = None
    for it in range(max_iter):
        new = apply(logw, v, N, C)
        if lazy:  # M + cI has the same Perron vector and is aperiodic
            if shift is None:
                shift = float(np.max(new))
            new = np.logaddexp(new, v + shift)
        top = np.max(new)
        new = new - top
        if lam is not None and abs(top - lam) <= tol * max(1.0, abs(top)):
            with np.errstate(invalid="ignore"):
                diff = np.max(np.abs(np.exp(new) - np.exp(v)))
            if diff <= tol:
                return new, it + 1
        lam = top
        v = new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", module=MODULE)


@dataclass
class PerronData:
    log_lambda: float
    logl: np.ndarray
    logr: np.ndarray
    iterations: int
    classes: int
    period: int


def perron(logw: np.ndarray, N: int, C: int, tol: float = DEFAULT_TOL,
           max_iter: int = MAX_ITER) -> PerronData:
    """Leading eigen-data of the nonnegative matrix with log entries on edges."""
    logw = logw.copy()
    n_classes, period = 1, 1
    if not np.all(np.isfinite(logw)):
        classes, _ = _classes(logw, N, C)
        if not classes:
            raise ReducibilityError("transfer graph has no cycle (empty subshift)", module=MODULE)
        n_classes = len(classes)
        if len(classes) > 1:
            radii = []
            for members in classes:
                sub = _restrict(logw, members, N, C)
                lam, _, _, _ = _perron_irreducible(sub, N, C, tol, max_iter, members)
                radii.append(lam)
            order = np.argsort(radii)[::-1]
            best = radii[order[0]]
            ties = [i for i in order if abs(radii[i] - best) <= 1e-9 * max(1.0, abs(best))]
            if len(ties) > 1:
                listing = [f"class of {len(classes[i])} states, log radius {radii[i]:.12g}"
                           for i in ties]
                raise ReducibilityError("ambiguous leading class: " + "; ".join(listing),
                                        classes=listing, module=MODULE)
            members = classes[order[0]]
        else:
            members = classes[0]
        logw = _restrict(logw, members, N, C)
        lam, logl, logr, (it, period) = _perron_irreducible(logw, N, C, tol, max_iter, members)
    else:
        lam, logl, logr, (it, period) = _perron_irreducible(logw, N, C, tol, max_iter, None)
    return PerronData(lam, logl, logr, it, n_classes, period)


def _restrict(logw, members, N, C):
    inside = np.zeros(N, dtype=bool)
    inside[members] = True
    e = np.arange(N * C)
    out = logw.copy()
    out[~(inside[e // C] & inside[e % N])] = -np.inf
    return out


def _perron_irreducible(logw, N, C, tol, max_iter, members):
    period = 1 if members is None else _period(logw, members, N, C)
    lazy = period != 1
    mask = None
    if members is not None:
        mask = np.full(N, -np.inf)
        mask[members] = 0.0
    starts = []
    for left in (False, True):
        s = _warm_start(logw, N, C, left)
        if s is None:
            s = np.zeros(N)
        if mask is not None:
            s = s + mask
        starts.append(s)
    logr, it_r = _power(logw, N, C, _apply_right, starts[0], tol, max_iter, lazy)
    logl, it_l = _power(logw, N, C, _apply_left, starts[1], tol, max_iter, lazy)
    # eigenvalue read off exactly from M r at the largest component
    mr = _apply_right(logw, logr, N, C)
    s = int(np.argmax(logr))
    return float(mr[s] - logr[s]), logl, logr, (max(it_r, it_l), period)


# -- equilibrium reports -----------------------------------------------------


@dataclass
class EquilibriumReport:
    beta: float
    geometry: Geometry
    pressure: float
    entropy: float
    energy: float
    marginals: dict
    zero_energy_nonempty: bool
    classes: int = 1
    iterations: int = 0
    masses: dict = field(default_factory=dict)
    _op: TransferOperator | None = field(default=None, repr=False)
    _perron: PerronData | None = field(default=None, repr=False)
    _edge_prob: np.ndarray | None = field(default=None, repr=False)

    @property
    def residual(self) -> float:
        """|pressure - entropy - beta * energy|, the variational equality defect."""
        return abs(self.pressure - self.entropy - self.beta * self.energy)

    @property
    def variational_ok(self) -> bool:
        return self.residual <= VARIATIONAL_TOL

    def edge_mass(self, mask: np.ndarray) -> float:
        """Equilibrium probability of the edge windows selected by ``mask``."""
        return float(np.sum(self._edge_prob[np.asarray(mask, dtype=bool)]))

    def cylinder_mass(self, family) -> float:
        return cylinder_mass_from_report(self, family)


def _zero_energy_nonempty(op: TransferOperator) -> bool:
    """Whether the edges of zero energy (and positive multiplicity) carry a bi-infinite path."""
    ok = (op.energy == 0) & np.isfinite(op.logmult)
    alive = np.ones(op.N, dtype=bool)
    e = np.arange(op.n_edges)
    src, dst = e // op.C, e % op.N
    while True:
        live_edge = ok & alive[src] & alive[dst]
        has_out = np.zeros(op.N, dtype=bool)
        has_in = np.zeros(op.N, dtype=bool)
        has_out[src[live_edge]] = True
        has_in[dst[live_edge]] = True
        new = alive & has_out & has_in
        if new.sum() == alive.sum():
            return bool(new.any())
        alive = new


def pressure(p: Potential, beta: float, geometry: Geometry = Geometry(), symbol_weights=None,
             tol: float = DEFAULT_TOL, cap: int = DEFAULT_MATRIX_CAP,
             op: TransferOperator | None = None) -> EquilibriumReport:
    """Pressure, entropy, energy and site marginals (per site) of the equilibrium state."""
    if not beta >= 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be finite and >= 0, got {beta}", module=MODULE)
    op = op or build_transfer(p, geometry, symbol_weights, cap)
    logw = op.log_weights(beta)
    pd = perron(logw, op.N, op.C, tol)
    N, C, h = op.N, op.C, op.height
    e = np.arange(N * C)
    src, dst = e // C, e % N
    with np.errstate(invalid="ignore"):
        lp = pd.logl[src] + logw + pd.logr[dst]
        lp = lp - float(_logsumexp(lp, axis=0))  # normalise the edge measure exactly
        prob = np.where(np.isfinite(lp), np.exp(lp), 0.0)
        logq = logw + pd.logr[dst] - pd.log_lambda - pd.logr[src]
    used = prob > 0
    energy = float(np.sum(prob[used] * op.energy[used]))
    entropy = float(-np.sum(prob[used] * logq[used]) + np.sum(prob[used] * op.logmult[used]))
    k = len(op.alphabet)
    digits = op.edge_digits()
    newest = digits[:, -1, 0]
    marg = {op.alphabet.symbols[a]: float(prob[newest == a].sum()) for a in range(k)}
    return EquilibriumReport(beta=beta, geometry=geometry, pressure=pd.log_lambda / h,
                             entropy=entropy / h, energy=energy / h, marginals=marg,
                             zero_energy_nonempty=_zero_energy_nonempty(op), classes=pd.classes,
                             iterations=pd.iterations, _op=op, _perron=pd, _edge_prob=prob)


def sweep(p: Potential, betas, geometry: Geometry = Geometry(), symbol_weights=None,
          threads: int = 1, **kw) -> list:
    """Reports for each beta, in the given order (independent of ``threads``)."""
    op = build_transfer(p, geometry, symbol_weights, kw.pop("cap", DEFAULT_MATRIX_CAP))
    run = lambda b: pressure(p, float(b), geometry, op=op, **kw)
    if threads <= 1:
        return [run(b) for b in betas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, betas))


def energy_bound_check(report: EquilibriumReport, alphabet_size: int):
    """Energy per site >= -log(alphabet_size)/beta; returns (holds, margin)."""
    if not report.zero_energy_nonempty:
        raise InapplicableError("the zero-energy subshift is empty; the bound does not apply",
                                module=MODULE)
    if report.beta <= 0:
        raise DomainError("the bound needs beta > 0", module=MODULE)
    margin = report.energy + math.log(alphabet_size) / report.beta
    return margin >= 0, margin


def cylinder_mass_from_report(report: EquilibriumReport, family) -> float:
    """Probability of the union of cylinders over ``family`` (patterns sharing one window)."""
    family = list(family)
    if not family:
        return 0.0
    op, pd = report._op, report._perron
    windows = {q.window for q in family}
    if len(windows) != 1:
        raise ContractViolation("family patterns must share one window", module=MODULE)
    win = next(iter(windows))
    if any(q.alphabet != op.alphabet for q in family):
        raise ContractViolation("family alphabet differs from the potential's", module=MODULE)
    pts = [(q[0], 0) for q in win.ordered] if win.dimension == 1 else list(win.ordered)
    if win.dimension == 2 and op.height == 1:
        raise ContractViolation("2D family on a chain", module=MODULE)
    width = 1 + max(x for x, _ in pts)
    if max(y for _, y in pts) >= op.height:
        raise CapExceeded("family window is taller than the strip", module=MODULE)
    if width <= op.edge_cols:
        digits = op.edge_digits()
        off = op.edge_cols - width
        k = len(op.alphabet)
        code = np.zeros(op.n_edges, dtype=np.int64)
        for x, y in pts:
            code = code * k + digits[:, off + x, y]
        wanted = np.array(sorted({_codes_of(op.alphabet, win, q.values) for q in family}))
        return float(report._edge_prob[np.isin(code, wanted)].sum())
    if op.height != 1 or not win.is_box:
        raise CapExceeded(f"family window of width {width} exceeds the strip state window",
                          module=MODULE)
    return float(sum(_walk_mass(report, list(q.values)) for q in set(family)))


def _walk_mass(report, word) -> float:
    """Markov-chain probability of a word longer than an edge (chain geometry)."""
    op, pd = report._op, report._perron
    C, N, L = op.C, op.N, op.edge_cols
    logw = op.log_weights(report.beta)
    e = 0
    for a in word[:L]:
        e = e * C + a
    prob = report._edge_prob[e]
    state = e % N
    for a in word[L:]:
        e = state * C + a
        with np.errstate(invalid="ignore"):
            lq = logw[e] + pd.logr[e % N] - pd.log_lambda - pd.logr[state]
        prob *= math.exp(lq) if np.isfinite(lq) else 0.0
        state = e % N
    return prob


def cylinder_mass(family, p: Potential, beta: float, geometry: Geometry = Geometry(),
                  symbol_weights=None) -> float:
    return cylinder_mass_from_report(pressure(p, beta, geometry, symbol_weights), family)


# -- potential text format ---------------------------------------------------


def parse_potential(text: str) -> Potential:
    """Read ``alphabet``, ``window`` (``L``, ``WxH`` or ``cross``), ``default E``,
    and per-pattern lines ``value <symbols...> = E`` / ``forbid <symbols...>``.

    Symbols are listed in row-major window order (bottom row first).
    """
    alphabet = window = None
    default = 0.0
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "alphabet":
                alphabet = Alphabet(tuple(rest))
            elif head == "window":
                spec = rest[0]
                if spec == "cross":
                    window = Window.cross()
                elif "x" in spec:
                    w, h = spec.split("x")
                    window = Window.rectangle(int(w), int(h))
                else:
                    window = Window.segment(int(spec))
            elif head == "default":
                default = float(rest[0])
            elif head == "value":
                eq = rest.index("=")
                entries.append((rest[:eq], float(rest[eq + 1]), lineno))
            elif head == "forbid":
                entries.append((rest, -1.0, lineno))
            else:
                raise ParseError(f"unknown directive {head!r}", lineno, module=MODULE)
        except (ValueError, IndexError):
            raise ParseError(f"malformed line {line!r}", lineno, module=MODULE) from None
    if alphabet is None or window is None:
        raise ParseError("potential needs 'alphabet' and 'window' lines", module=MODULE)
    table = np.full(len(alphabet) ** len(window), default)
    for syms, e, lineno in entries:
        if len(syms) != len(window):
            raise ParseError(f"expected {len(window)} symbols", lineno, module=MODULE)
        table[_codes_of(alphabet, window, [alphabet.index(s) for s in syms])] = e
    return Potential(alphabet, window, table)


def format_potential(p: Potential) -> str:
    lines = ["alphabet " + " ".join(p.alphabet.symbols)]
    w = p.window
    if w == Window.cross():
        lines.append("window cross")
    elif w.dimension == 1:
        lines.append(f"window {len(w)}")
    else:
        lines.append(f"window {w.width}x{w.height}")
    lines.append("default 0")
    k = len(p.alphabet)
    for code in np.nonzero(p.table != 0)[0]:
        vals, c = [], int(code)
        for _ in range(len(w)):
            c, d = divmod(c, k)
            vals.insert(0, d)
        lines.append("value " + " ".join(p.alphabet.symbols[v] for v in vals) + f" = {float(p.table[code])!r}")
    return "\n".join(lines) + "\n"


# -- oscillation demo ----------------------------------------------------------

DEFAULT_DEMO_BETAS = (0.5, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32)
DOMINANCE = 0.9


def _family_masks(s, K: int, codes_digits: np.ndarray):
    """Boolean masks over windows of length W_K (signed-alphabet digit rows):
    ``sub[par]`` = window uses only the family's symbols, ``adm[(par, k)]`` =
    prefix of length W_k is admissible for the family's levels <= k.

    A family with levels among 1..K but none <= k is unconstrained at level k
    (only its symbols are required); a family with no level <= K admits nothing.
    """
    from .subshift import MINUS, PLUS, SIGNED, level_constraints

    minus_i, zero_i, plus_i = (SIGNED.index(c) for c in "-0+")
    zeros = (codes_digits == zero_i).astype(np.int32)
    csum = np.concatenate([np.zeros((len(zeros), 1), np.int32), np.cumsum(zeros, axis=1)], axis=1)
    banned = {PLUS: minus_i, MINUS: plus_i}
    sub, adm = {}, {}
    for par in (PLUS, MINUS):
        bad = codes_digits == banned[par]
        sub[par] = ~bad.any(axis=1)
        for k in range(1, K + 1):
            cons = level_constraints(k, par, s)
            Wk = s.window(k)
            if not level_constraints(K, par, s):
                adm[(par, k)] = np.zeros(len(zeros), dtype=bool)
                continue
            ok = ~bad[:, :Wk].any(axis=1)
            for w, lim in cons:
                for i in range(Wk - w + 1):
                    ok &= (csum[:, i + w] - csum[:, i]) <= lim
            adm[(par, k)] = ok
    return sub, adm


def oscillation_potential(s, K: int, weights=None, reading: str = "family",
                          cap: int = DEFAULT_MATRIX_CAP) -> Potential:
    """Signed-alphabet potential on windows of length W_K built from the first K levels.

    ``reading='family'``: -sum_k w_k [prefix of length W_k admissible for neither
    family at level k]. A family's constraints switch on at its own levels, so
    below its first level it only needs its symbols; a family without any level
    <= K admits nothing, which makes K = 1 the plain level-1 indicator. Default
    weights are (W_1/W_k)^2, so deeper levels bite only at larger beta.
    ``reading='literal'``: -1 when the prefix of length W_k is forbidden at level k
    for some k <= K (the indicator of the union of the forbidden sets).
    """
    from .subshift import SIGNED, parity_of_level

    if not 1 <= K <= min(3, s.depth):
        raise DomainError(f"demo needs 1 <= K <= min(3, depth), got K={K}", module=MODULE)
    W = s.window(K)
    size = 3 ** W
    if size > cap:
        raise CapExceeded(f"window of length {W} has {size} patterns", cap=cap, module=MODULE)
    digits = _digits(size, W, 3)
    _, adm = _family_masks(s, K, digits)
    if weights is None:
        weights = [(s.window(1) / s.window(k)) ** 2 for k in range(1, K + 1)]
    if len(weights) != K:
        raise DomainError("need one weight per level", module=MODULE)
    energy = np.zeros(size)
    if reading == "family":
        for k in range(1, K + 1):
            energy -= weights[k - 1] * ~(adm[("plus", k)] | adm[("minus", k)])
    elif reading == "literal":
        forbidden = np.zeros(size, dtype=bool)
        for k in range(1, K + 1):
            forbidden |= ~adm[(parity_of_level(k), k)]
        energy -= forbidden
    else:
        raise DomainError(f"reading must be 'family' or 'literal', got {reading!r}", module=MODULE)
    return Potential(SIGNED, Window.segment(W), energy)


@dataclass
class OscillationReport:
    K: int
    rows: list          # dicts with the CSV columns
    weighted_plus: float
    weighted_minus: float
    dominant: list      # per beta: 'plus', 'minus' or None
    flip: tuple | None  # (beta1, beta2, from, to) at the first change of dominance

    CSV_COLUMNS = ("beta", "pressure", "entropy", "energy", "mass_plus", "mass_minus",
                   "mass_plus_strict", "mass_minus_strict")

    @property
    def predicted(self) -> str:
        """Family favoured at large beta by the weighted admissible counts."""
        return "plus" if self.weighted_plus > self.weighted_minus else "minus"

    @property
    def final_dominant(self):
        last = [d for d in self.dominant if d is not None]
        return last[-1] if last else None

    @property
    def consistent(self) -> bool:
        return self.final_dominant == self.predicted

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.CSV_COLUMNS)
        for row in self.rows:
            wr.writerow([_fmt(row[c]) for c in self.CSV_COLUMNS])
        return buf.getvalue()


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, str) else x


def oscillation_demo(s, K: int = 2, betas=DEFAULT_DEMO_BETAS, weights=None, b: float = 2.0,
                     reading: str = "family", threads: int = 1) -> OscillationReport:
    """Sweep beta over the level potential and track which family's cylinders carry the mass.

    Family cylinders are the windows of length W_K written in one family's
    symbols; the ``_strict`` masses additionally ask for admissibility at all
    of the family's levels <= K. The zero symbol carries multiplicity ``b``.
    """
    from .subshift import weighted_G_count

    p = oscillation_potential(s, K, weights, reading)
    W = s.window(K)
    reports = sweep(p, betas, Geometry.chain(), symbol_weights=[1.0, b, 1.0], threads=threads)
    digits = reports[0]._op.edge_digits().reshape(-1, W)
    sub, adm = _family_masks(s, K, digits)
    rows, dominant = [], []
    for r in reports:
        row = dict(beta=r.beta, pressure=r.pressure, entropy=r.entropy, energy=r.energy,
                   mass_plus=r.edge_mass(sub["plus"]), mass_minus=r.edge_mass(sub["minus"]),
                   mass_plus_strict=r.edge_mass(adm[("plus", K)]),
                   mass_minus_strict=r.edge_mass(adm[("minus", K)]))
        rows.append(row)
        dominant.append("plus" if row["mass_plus"] > DOMINANCE else
                        "minus" if row["mass_minus"] > DOMINANCE else None)
    flip = None
    seen = [(beta, d) for beta, d in zip(betas, dominant) if d is not None]
    for (b1, d1), (b2, d2) in zip(seen, seen[1:]):
        if d1 != d2:
            flip = (b1, b2, d1, d2)
            break
    base = Fraction(b).limit_denominator(10 ** 12) if not isinstance(b, str) else b
    wp = weighted_G_count(K, "plus", s, base, scale="site").value
    wm = weighted_G_count(K, "minus", s, base, scale="site").value
    return OscillationReport(K, rows, wp, wm, dominant, flip)
