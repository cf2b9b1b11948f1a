"""Wang tiles: solver, transfer counting, coordinate/macro tiles, simulation, SFT encoding.

Independent oracles: a plain itertools walk over every assignment of tiles to
cells with its own edge check, and a brute-force enumeration of symbol grids
avoiding forbidden dominoes.
"""
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from subshiftlab.core import Alphabet, ForbiddenSet, Pattern
from subshiftlab.errors import (CapExceeded, ContractViolation, ConversionError, EnumerationOverflow,
                                ParseError)
from subshiftlab.wang import (Region, Tile, TileSet, Tiling, count_by_transfer, count_solutions,
                              coordinate_macro, coordinate_tileset, macro_tiles, sft_to_wang, solve,
                              validate, verify_simulation)

MONO = TileSet((Tile("a", "a", "a", "a"),))


def legal(ts, w, h, cells, wrap="free", boundary=None):
    """Oracle edge check; cells[y][x] with y = 0 the bottom row."""
    for y in range(h):
        for x in range(w):
            t = ts[cells[y][x]]
            if x + 1 < w or wrap == "torus":
                if t.right != ts[cells[y][(x + 1) % w]].left:
                    return False
            if y + 1 < h or wrap == "torus":
                if t.top != ts[cells[(y + 1) % h][x]].bottom:
                    return False
    for (side, pos), c in (boundary or {}).items():
        x, y = {"left": (0, pos), "right": (w - 1, pos), "bottom": (pos, 0), "top": (pos, h - 1)}[side]
        if getattr(ts[cells[y][x]], side) != c:
            return False
    return True


def brute_tilings(ts, w, h, wrap="free", boundary=None):
    out = []
    for flat in itertools.product(range(len(ts)), repeat=w * h):
        cells = [flat[y * w:(y + 1) * w] for y in range(h)]
        if legal(ts, w, h, cells, wrap, boundary):
            out.append(flat)
    return out


def random_tileset(rng, n_tiles, n_colors):
    cs = [str(c) for c in range(n_colors)]
    return TileSet(tuple(Tile(*(rng.choice(cs) for _ in range(4))) for _ in range(n_tiles)))


# -- basics --------------------------------------------------------------------


def test_validate_examples():
    assert validate(Tiling(MONO, Region(3, 3), (0,) * 9))
    ts = TileSet((Tile("a", "b", "x", "x"), Tile("c", "a", "x", "x")))
    assert not validate(Tiling(ts, Region(2, 1), (0, 0)))
    N2 = coordinate_tileset(2)
    cells = tuple(((x) % 2) * 2 + (y % 2) for y in range(2) for x in range(2))
    assert validate(Tiling(N2, Region(2, 2, "torus"), cells))


def test_solve_examples():
    assert len(solve(MONO, Region(4, 3))) == 1
    no_match = TileSet((Tile("a", "b", "x", "x"), Tile("c", "d", "x", "x")))
    assert solve(no_match, Region(2, 1)) == []
    assert len(solve(coordinate_tileset(2), Region(2, 2))) == 4


def test_solve_caps():
    with pytest.raises(EnumerationOverflow):
        solve(coordinate_tileset(3), Region(2, 2), limit=5)
    with pytest.raises(CapExceeded):
        solve(MONO, Region(100, 100), area_cap=4096)


def test_region_validation():
    with pytest.raises(ContractViolation):
        Region(2, 2, "torus", {("left", 0): "a"})
    with pytest.raises(ContractViolation):
        Region(0, 2)


def test_solver_and_transfer_against_brute_force():
    rng = random.Random(1234)
    for trial in range(100):
        ts = random_tileset(rng, rng.randint(1, 6), rng.randint(1, 3))
        w, h = rng.randint(1, 4), rng.randint(1, 4)
        wrap = rng.choice(["free", "torus"])
        region = Region(w, h, wrap)
        found = solve(ts, region)
        assert all(validate(t) for t in found)
        assert len({t.cells for t in found}) == len(found)
        assert count_by_transfer(ts, region) == len(found) == count_solutions(ts, region)
        if len(ts) ** (w * h) <= 50_000:
            assert sorted(t.cells for t in found) == sorted(brute_tilings(ts, w, h, wrap))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(1, 3))
def test_boundary_constraints_against_brute_force(seed, w, h):
    rng = random.Random(seed)
    ts = random_tileset(rng, rng.randint(1, 4), 2)
    boundary = {("left", y): rng.choice("01") for y in range(h) if rng.random() < 0.5}
    boundary.update({("top", x): rng.choice("01") for x in range(w) if rng.random() < 0.5})
    region = Region(w, h, "free", boundary)
    expected = len(brute_tilings(ts, w, h, "free", boundary))
    assert len(solve(ts, region)) == expected == count_by_transfer(ts, region)


def test_text_format_round_trip_and_errors():
    ts = coordinate_tileset(3)
    back = TileSet.from_text(ts.to_text())
    assert back == ts
    with pytest.raises(ParseError) as e:
        TileSet.from_text("colors a\ntile x l=a r=a t=a b=zz\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        TileSet.from_text("tile x l=a r=a\n")


# -- coordinate and macro tiles -------------------------------------------------


def test_coordinate_tile_rule():
    ts = coordinate_tileset(2)
    assert len(ts) == 4
    t00 = ts[0]
    assert (t00.left, t00.bottom, t00.right, t00.top) == ("0.0", "0.0", "1.0", "0.1")
    with pytest.raises(ContractViolation):
        coordinate_tileset(1)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_coordinate_counts(N):
    ts = coordinate_tileset(N)
    for w in range(2, 6):
        for h in range(2, 6):
            assert count_by_transfer(ts, Region(w, h)) == N * N
    assert len(solve(ts, Region(3, 4))) == N * N
    assert count_by_transfer(ts, Region(N, N, "torus")) == N * N


def test_macro_tiles():
    assert len(macro_tiles(MONO, 2)) == 1
    ts = coordinate_tileset(3)
    blocks = macro_tiles(ts, 3)
    assert len(blocks) == 9
    assert {b.cells for b in blocks} == {coordinate_macro(3, i, j).cells for i in range(3) for j in range(3)}
    assert {b.cells for b in macro_tiles(ts, 1)} == {(i,) for i in range(len(ts))}
    # tile 1 never sits right of tile 0; all other adjacencies are fine
    broken = TileSet((Tile("a", "b", "v", "v"), Tile("c", "a", "v", "v")))
    got = sorted(b.cells for b in macro_tiles(broken, 2))
    assert got == sorted(brute_tilings(broken, 2, 2))
    assert all(row not in {(0, 1)} for cells in got for row in (cells[:2], cells[2:]))


def test_simulation_example_holds():
    rho = TileSet((Tile("0", "0", "0", "0"),))
    rep = verify_simulation(rho, coordinate_tileset(2), 2, {0: coordinate_macro(2)}, k_max=2)
    assert rep.injective and rep.matching and rep.unique_split and rep.holds
    assert [k for k, _ in rep.checked_tori] == [1, 2]


def test_simulation_failures():
    tau = coordinate_tileset(2)
    two = TileSet((Tile("x", "x", "y", "y"), Tile("x", "x", "z", "z")))
    same = verify_simulation(two, tau, 2, {0: coordinate_macro(2), 1: coordinate_macro(2)}, k_max=1)
    assert not same.injective and not same.holds
    # rho tiles sit side by side, their images do not
    split = verify_simulation(two, tau, 2, {0: coordinate_macro(2), 1: coordinate_macro(2, 1, 0)},
                              k_max=1)
    assert split.injective and not split.matching
    rogue = TileSet(tau.tiles + (Tile("0.0", "0.0", "0.0", "0.0"),), tau.names + ("rogue",))
    rho = TileSet((Tile("0", "0", "0", "0"),))
    rep = verify_simulation(rho, rogue, 2, {0: coordinate_macro(2)}, k_max=1)
    assert not rep.unique_split and any(f.startswith("(c)") for f in rep.failures)


# -- SFT to Wang -----------------------------------------------------------------


def domino_sft(alph, h_bad=(), v_bad=(), singles=()):
    pats = [Pattern.from_rows(alph, [[a, b]]) for a, b in h_bad]
    pats += [Pattern.from_rows(alph, [[a], [b]]) for a, b in v_bad]  # bottom row first
    pats += [Pattern.from_rows(alph, [[a]]) for a in singles]
    return ForbiddenSet(alph, tuple(pats))


def brute_sft_grids(alph, h_bad, v_bad, singles, w, h, wrap="free"):
    out = set()
    for flat in itertools.product(alph.symbols, repeat=w * h):
        g = [flat[y * w:(y + 1) * w] for y in range(h)]
        if any(c in singles for c in flat):
            continue
        if any((g[y][x], g[y][(x + 1) % w]) in h_bad for y in range(h) for x in range(w)
               if x + 1 < w or wrap == "torus"):
            continue
        if any((g[y][x], g[(y + 1) % h][x]) in v_bad for y in range(h) for x in range(w)
               if y + 1 < h or wrap == "torus"):
            continue
        out.add(flat)
    return out


def tiled_grids(enc, w, h, wrap="free"):
    region = enc.region(w, h, wrap)
    out = []
    for t in solve(enc.tileset, region):
        pat = enc.configuration(t)
        out.append(tuple(pat.alphabet.symbols[pat.cells[(x, y)]] for y in range(h) for x in range(w)))
    return out


def test_golden_mean_encoding():
    B = Alphabet(("0", "1"))
    enc = sft_to_wang(domino_sft(B, [("1", "1")], [("1", "1")]))
    assert len(enc.tileset) == 5 and len(enc.tileset.colors) == 4
    for (w, h), n in {(2, 2): 7, (3, 3): 63}.items():
        assert count_by_transfer(enc.tileset, enc.region(w, h)) == n
    assert count_by_transfer(enc.tileset, enc.region(2, 2, "torus")) == 7


def test_sft_encoding_edge_cases():
    a = Alphabet(("a",))
    enc = sft_to_wang(ForbiddenSet(a, ()))
    assert len(enc.tileset) == 1 and len(solve(enc.tileset, enc.region(3, 2))) == 1
    with pytest.raises(ConversionError):
        sft_to_wang(domino_sft(Alphabet(("x", "y")), singles=["x", "y"]))
    tri = Alphabet(("0", "1"))
    with pytest.raises(ConversionError):
        sft_to_wang(ForbiddenSet(tri, (Pattern.from_rows(tri, [["1", "1", "1"]]),)))


pairs = lambda syms: st.lists(st.tuples(st.sampled_from(syms), st.sampled_from(syms)), max_size=5)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3).flatmap(lambda n: st.tuples(
    st.just(n), pairs("abc"[:n]), pairs("abc"[:n]),
    st.lists(st.sampled_from("abc"[:n]), max_size=1))), st.sampled_from(["free", "torus"]))
def test_sft_encoding_is_a_bijection(data, wrap):
    n, h_bad, v_bad, singles = data
    alph = Alphabet(tuple("abc"[:n]))
    h_bad, v_bad = set(h_bad), set(v_bad)
    F = domino_sft(alph, h_bad, v_bad, singles)
    if len(set(singles)) == n:
        return
    enc = sft_to_wang(F)
    for w, h in ((2, 2), (3, 2), (2, 3)):
        grids = tiled_grids(enc, w, h, wrap)
        assert len(grids) == len(set(grids))  # each configuration is tiled once
        assert set(grids) == brute_sft_grids(alph, h_bad, v_bad, set(singles), w, h, wrap)
