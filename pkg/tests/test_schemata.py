import pytest

from conftest import load_display, load_fixed_displays
from veltman.formula import TOP, Imp, flatten_and, parse, substitute, to_text
from veltman.schemata import (
    FIXED_NAMES, IL_AXIOMS, SchemaId, broad, broad_u, fixed, generate, parse_schema_id,
    reversal_map, slim, slim_tilde, slim_xyz,
)


def same(f, g):
    return flatten_and(f) == flatten_and(g)


@pytest.mark.parametrize("n", range(5))
def test_slim_matches_display(n):
    assert same(slim(n), load_display(f"slim_{n}"))


@pytest.mark.parametrize("n", range(3))
def test_slim_tilde_matches_display(n):
    assert same(slim_tilde(n), load_display(f"slim_tilde_{n}"))


@pytest.mark.parametrize("n", range(4))
def test_broad_matches_display(n):
    assert same(broad(n), load_display(f"broad_{n}"))


@pytest.mark.parametrize("n", range(1, 4))
def test_broad_u_matches_display(n):
    assert same(broad_u(n), load_display(f"broad_u_{n}"))


@pytest.mark.parametrize("name", sorted(load_fixed_displays()))
def test_fixed_matches_display(name):
    assert same(fixed(name), load_fixed_displays()[name])


def test_every_fixed_principle_has_a_display():
    assert set(load_fixed_displays()) == set(FIXED_NAMES)


def test_slim0_text():
    assert slim(0) == parse("a0|>b0 -> ~(a0|>~c0) |> b0 & []c0")


def test_slim4_antecedent():
    assert isinstance(slim(4), Imp)
    assert slim(4).left == parse("a0 |> b0 & (a1|>b1&(a2|>b2))")


def test_xyz_zero():
    assert slim_xyz(0) == (parse("a0 |> b0"), parse("~(a0 |> ~c0)"), parse("b0 & []c0"))


def test_z1_after_flattening():
    assert same(slim_xyz(1)[2], parse("b1 & (a0|>b0) & []c1 & (e1|>a0) & (e1|> b0 & []c0)"))


def test_minus_one_is_top():
    assert slim_xyz(-1) == (TOP, TOP, TOP)


def test_tilde0_is_slim0():
    assert slim_tilde(0) == slim(0)


@pytest.mark.parametrize("k", range(5))
def test_renaming_identity(k):
    assert same(substitute(slim_tilde(k), reversal_map(k)), slim(2 * k))


def test_odd_slim_is_not_a_renamed_tilde():
    # sanity: the identity is specific to even indices
    assert not same(substitute(slim_tilde(1), reversal_map(1)), slim(3))


def test_broad_u1_text():
    assert to_text(broad_u(1)) == "<>~(d1 |> ~c)"


def test_fixed_examples():
    assert fixed("J5") == parse("<>p |> p")
    assert fixed("M") == parse("p|>q -> p&[]r |> q&[]r")
    assert to_text(fixed("W")) == "a |> b -> a |> b & []~a"


def test_il_axiom_names():
    assert IL_AXIOMS == ("L1", "L2", "L3", "J1", "J2", "J3", "J4", "J5")


@pytest.mark.parametrize("bad", [["slim", "-1"], ["broad-u", "0"], ["nope", "1"],
                                 ["fixed", "Q"], ["slim", "x"], ["slim"]])
def test_bad_schema_ids(bad):
    with pytest.raises(ValueError):
        parse_schema_id(bad)


def test_schema_ids_dispatch():
    assert generate(parse_schema_id(["slim-tilde", "2"])) == slim_tilde(2)
    assert generate(SchemaId("fixed", name="P")) == fixed("P")
    assert generate(parse_schema_id(["broad-u", "2"])) == broad_u(2)


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        slim(-1)
    with pytest.raises(ValueError):
        broad_u(0)
