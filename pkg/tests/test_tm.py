"""Turing machines, their tile compilation and the macro-tile layout.

The simulator oracle below is a ten-line stepper written from the rule text,
sharing nothing with the package's parser or simulator.
"""
import pytest

from subshiftlab.errors import BoundaryExit, LayoutError, ParseError
from subshiftlab.tm import (REFERENCE_MACHINES, QUIET, MacroLayout,
                            assemble_macrotile, compile_tm, count_computation_fillings,
                            expected_tile_count, format_tm, input_color, input_independence,
                            parse_tm, reference_machine, simulate, tilings_of)
from subshiftlab.wang import Region, solve


def oracle_run(text, tape, steps, initial):
    """Return [(state, head, tape)] for times 0..steps (stops at a state without rules)."""
    rules = {}
    for line in text.splitlines():
        p = line.split()
        if p and p[0] == "rule":
            rules[(p[1], p[2])] = (p[4], p[5], {"L": -1, "R": 1, "S": 0}[p[6]])
    q, pos, tape = initial, 0, list(tape)
    out = [(q, pos, tuple(tape))]
    for _ in range(steps):
        if (q, tape[pos]) not in rules:
            break
        q, tape[pos], d = rules[(q, tape[pos])]
        pos += d
        out.append((q, pos, tuple(tape)))
    return out


def as_rows(run):
    return [tuple((q, s) if x == pos else s for x, s in enumerate(tape)) for q, pos, tape in run]


# -- parsing -----------------------------------------------------------------------


def test_parse_reference_machines_round_trip():
    for name, text in REFERENCE_MACHINES.items():
        tm = parse_tm(text)
        assert parse_tm(format_tm(tm)) == tm, name
    rm = reference_machine("right-mover")
    assert rm.states == ("q0",) and rm.blank == "_"
    assert len(reference_machine("binary-counter").states) == 3


@pytest.mark.parametrize("text, line", [
    ("states q\nblank _\nrule q _ -> q _ R\nrule q _ -> q _ L\n", 4),
    ("states q\nblank _\ninitial z\nrule q _ -> q _ R\n", 3),
    ("states q\nblank _\nrule q _ -> q _ X\n", 3),
    ("states q h\nhalt h\nblank _\nrule q _ -> h _ S\nrule h _ -> q _ S\n", 5),
])
def test_parse_errors_carry_lines(text, line):
    with pytest.raises(ParseError) as e:
        parse_tm(text)
    assert e.value.line == line


def test_parse_missing_pieces():
    with pytest.raises(ParseError):
        parse_tm("states q\nrule q _ -> q _ R\n")          # no blank
    with pytest.raises(ParseError):
        parse_tm("states q\nblank _\nsymbols 0\nrule q _ -> q _ R\n")  # no rule for (q, 0)


# -- simulation --------------------------------------------------------------------


def test_simulate_examples():
    d = simulate(reference_machine("right-mover"), "", 3, width=4)
    assert [d.head(t) for t in range(4)] == [0, 1, 2, 3]
    assert simulate(reference_machine("immediate-halt"), "01", 5).height == 1
    with pytest.raises(BoundaryExit) as e:
        simulate(reference_machine("right-mover"), "", 5, width=3)
    assert e.value.step == 3


@pytest.mark.parametrize("name, tape, steps", [
    ("binary-counter", "11___", 6), ("binary-counter", "101__", 12), ("shuttle", "0110", 9),
    ("reject-11", "110", 4), ("right-mover", "0101", 3),
])
def test_simulate_matches_oracle(name, tape, steps):
    tm = reference_machine(name)
    assert list(simulate(tm, tape, steps).rows) == as_rows(oracle_run(REFERENCE_MACHINES[name], tape,
                                                                       steps, tm.initial))


def test_counter_counts():
    # LSB on the left, cell 0 carries a marker (a = 0, b = 1); "11" is 3, the next visit is 4
    d = simulate(reference_machine("binary-counter"), "11", 6, width=5)
    tape = [c[1] if isinstance(c, tuple) else c for c in d.rows[-1]]
    bits = [{"a": "0", "b": "1"}.get(s, s) for s in tape]
    assert "".join(bits).rstrip("_") == "001"


# -- compilation -------------------------------------------------------------------


def test_tile_count_audit_and_halting_exclusion():
    for name in REFERENCE_MACHINES:
        tm = reference_machine(name)
        ct = compile_tm(tm)
        assert len(ct.tileset) == expected_tile_count(tm), name
        halting = {f"{q}:{s}" for q in tm.halting for s in tm.alphabet}
        assert not any(t.bottom in halting for t in ct.tileset), name


@pytest.mark.parametrize("name, input, w, h, expected", [
    ("right-mover", "", 4, 3, 1), ("binary-counter", "11", 5, 7, 1),
    ("immediate-halt", "", 3, 2, 0), ("halt-after-one", "0", 3, 3, 0),
    ("shuttle", "01", 3, 5, 1),
])
def test_tilings_match_simulation(name, input, w, h, expected):
    tm = reference_machine(name)
    ct = compile_tm(tm)
    tilings = tilings_of(ct, input, w, h)
    assert len(tilings) == expected
    for t in tilings:
        assert ct.diagram(t).rows == simulate(tm, input, h - 1, width=w).rows


def test_quiescent_region_has_one_tiling():
    tm = reference_machine("right-mover")
    ct = compile_tm(tm)
    b = {("bottom", x): input_color(s) for x, s in enumerate("01_")}
    b.update({("left", y): QUIET for y in range(3)})
    tilings = solve(ct.tileset, Region(3, 3, "free", b))
    assert len(tilings) == 1
    assert all(ct.origin[c][0] in ("quiet", "input") for c in tilings[0].cells)


def test_computation_fillings_examples():
    loop = reference_machine("accept-all")
    assert count_computation_fillings(loop, "01", 4, 4) == count_computation_fillings(loop, "10", 4, 4) == 1
    rej = reference_machine("reject-11")
    assert {w: count_computation_fillings(rej, w, 3, 3) for w in ("00", "01", "10", "11")} == \
        {"00": 1, "01": 1, "10": 1, "11": 0}


@pytest.mark.parametrize("length", [1, 2, 3, 4, 5])
def test_input_independence_for_non_halting_checker(length):
    rep = input_independence(reference_machine("shuttle"), length, w=5, h=4)
    assert rep.constant and len(rep.counts) == 2 ** length
    assert set(rep.counts.values()) == {1}


def test_input_independence_fails_for_rejecting_checker():
    rep = input_independence(reference_machine("reject-11"), 2, w=3, h=3)
    assert not rep.constant


# -- macro layout ---------------------------------------------------------------------


def test_layout_minimum_and_error():
    assert MacroLayout.minimum(1, 2) == 17
    with pytest.raises(LayoutError) as e:
        assemble_macrotile(16, ("0", "1", "0", "1"), reference_machine("accept-all"), 2)
    assert e.value.minimum == 17


def test_accepting_checker_block_and_routing():
    io = ("1", "0", "1", "1")
    bundle = assemble_macrotile(17, io, reference_machine("accept-all"), 2)
    sols = bundle.solutions(limit=4)
    assert len(sols) >= 1
    assert all(bundle.zone_tape(t) == "".join(io) for t in sols)


def test_rejecting_checker_has_no_block():
    rej = reference_machine("reject-first-1")
    assert not assemble_macrotile(17, ("1", "0", "0", "0"), rej, 2).exists()
    assert assemble_macrotile(17, ("0", "1", "1", "1"), rej, 2).exists()


def test_wider_boundary_routes():
    N = MacroLayout.minimum(2, 2)
    io = ("10", "01", "11", "00")
    bundle = assemble_macrotile(N, io, reference_machine("accept-all"), 2)
    assert bundle.zone_tape(bundle.solutions(limit=1)[0]) == "".join(io)
