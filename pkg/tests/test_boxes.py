import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from oracles import correlator_loop, tripartite_table
from tristeer.boxes import (
    BipartiteBox,
    BoxFormatError,
    BoxValidationError,
    PartyRelabeling,
    Relabeling,
    TripartiteBox,
    all_relabelings,
    bb84_family,
    bipartite_signaling,
    born_tripartite,
    box_from_csv,
    box_from_json,
    box_to_csv,
    box_to_json,
    check_no_signaling,
    chsh_family,
    correlator,
    lro_apply,
    lro_equivalent,
    max_abs_diff,
    mermin_family,
    svetlichny_family,
    uniform_tripartite,
)
from tristeer.inequalities import chsh_value
from tristeer.lhv import svf_steering_model
from tristeer.states import DensityMatrix, mermin_settings, noisy_ghz, svetlichny_settings

SQ2 = np.sqrt(2)
GRID = np.linspace(0, 1, 101)


def _obs(s):
    return [[o.matrix for o in party] for party in s.parties()]


@pytest.mark.parametrize("v", [0, 0.3, 1 / SQ2, 1])
def test_born_matches_svetlichny_family(v):
    got = born_tripartite(noisy_ghz(v), svetlichny_settings())
    assert max_abs_diff(got, svetlichny_family(v)) <= 1e-12


@pytest.mark.parametrize("v", [0.0, 0.25, 0.6, 1.0])
def test_born_matches_mermin_family(v):
    got = born_tripartite(noisy_ghz(v), mermin_settings())
    assert max_abs_diff(got, mermin_family(v)) <= 1e-12


@pytest.mark.parametrize("factory", [svetlichny_settings, mermin_settings])
def test_born_agrees_with_eigenvector_oracle(factory):
    s = factory()
    rho = noisy_ghz(0.37).matrix
    expected = tripartite_table(rho, *_obs(s))
    assert_allclose(born_tripartite(noisy_ghz(0.37), s).p, expected, atol=1e-12)


def test_born_maximally_mixed_uniform():
    box = born_tripartite(DensityMatrix(np.eye(8) / 8, (2, 2, 2)), mermin_settings())
    assert_allclose(box.p, 1 / 8, atol=1e-15)


def test_born_dimension_mismatch():
    with pytest.raises(ValueError):
        born_tripartite(DensityMatrix(np.eye(4) / 4, (2, 2)), svetlichny_settings())


def test_svetlichny_family_entries():
    assert_allclose(svetlichny_family(0).p, 1 / 8)
    assert svetlichny_family(1)(0, 0, 0, 0, 0, 0) == pytest.approx((2 + SQ2) / 16)
    # x=y=z=0, odd outcome parity
    assert svetlichny_family(1 / SQ2)(1, 0, 0, 0, 0, 0) == pytest.approx(1 / 16)


def test_mermin_family_entries():
    box = mermin_family(1)
    # setting (0, 0, 1) is active
    assert box(0, 0, 0, 0, 0, 1) == pytest.approx(1 / 4)
    assert box(1, 0, 0, 0, 0, 1) == pytest.approx(0)
    for v in (0.2, 0.9):
        assert_allclose(mermin_family(v).p[0, 0, 0], 1 / 8)
    assert mermin_family(0.5)(1, 0, 0, 1, 1, 1) == pytest.approx(3 / 16)


@pytest.mark.parametrize("fn, v", [(svetlichny_family, -0.1), (svetlichny_family, 1.1), (mermin_family, 1.5)])
def test_family_range(fn, v):
    with pytest.raises(ValueError):
        fn(v)


def test_bb84_family():
    assert bb84_family(1)(0, 0, 0, 0) == pytest.approx(0.5)
    assert_allclose(bb84_family(0.3).p[0, 1], 0.25)
    w = SQ2 * (1 / (2 * SQ2))
    assert w == pytest.approx(0.5)


def test_chsh_family():
    assert chsh_family(1)(0, 0, 0, 0) == pytest.approx((2 + SQ2) / 8)
    for w in (0.1, 0.7, 1.0):
        box = chsh_family(w)
        assert_allclose(box.p.sum(axis=(2, 3)), 1, atol=1e-15)
        assert chsh_value(box) == pytest.approx(2 * SQ2 * w, abs=1e-12)


@pytest.mark.parametrize("v", [0.1, 0.45, 0.9])
def test_correlators_of_svetlichny_family(v):
    box = svetlichny_family(v)
    for x, y, z in itertools.product((0, 1), repeat=3):
        sign = (-1) ** ((x * y + y * z + x * z) % 2)
        assert correlator(box, x, y, z) == pytest.approx(sign * v / SQ2, abs=1e-12)
        assert correlator(box, x, y, z) == pytest.approx(correlator_loop(box.p, x, y, z), abs=1e-15)


def test_correlators_of_mermin_family():
    v = 0.8
    box = mermin_family(v)
    assert correlator(box, 0, 0, 1) == pytest.approx(v)
    assert correlator(box, 1, 1, 1) == pytest.approx(-v)
    assert correlator(uniform_tripartite(), 1, 0, 1) == pytest.approx(0)


def test_no_signaling_analytic_family():
    assert check_no_signaling(svetlichny_family(0.7)).max_violation == 0.0


def test_no_signaling_born_box():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    box = born_tripartite(DensityMatrix(rho, (2, 2, 2)), svetlichny_settings())
    assert check_no_signaling(box).max_violation <= 1e-12


def test_no_signaling_detects_counterexample():
    p = np.array(svetlichny_family(0.3).p)
    p[0, 0, 0, 0, 0, 0] -= 0.01
    p[0, 0, 0, 1, 0, 0] += 0.01
    rep = check_no_signaling(TripartiteBox(p))
    assert rep.max_violation == pytest.approx(0.01, abs=1e-12)
    assert not rep.passed
    with pytest.raises(BoxValidationError):
        TripartiteBox(p).validate()


@pytest.mark.parametrize("v", GRID[::10])
def test_generated_boxes_pass_no_signaling(v):
    for box in (svetlichny_family(v), mermin_family(v), born_tripartite(noisy_ghz(v), mermin_settings())):
        assert check_no_signaling(box, 1e-10).passed


def test_box_rejects_bad_normalization():
    with pytest.raises(BoxValidationError):
        TripartiteBox(np.full((2,) * 6, 0.2))


# ---------------------------------------------------------------- relabelings

party_r = st.builds(PartyRelabeling, st.integers(0, 1), st.integers(0, 1), st.integers(0, 1))
relabelings = st.builds(Relabeling, party_r, party_r)
weights = st.floats(0.05, 1.0)


def test_identity_relabeling():
    box = chsh_family(0.6)
    assert max_abs_diff(lro_apply(box, Relabeling()), box) == 0.0


@given(relabelings, weights)
@settings(max_examples=60, deadline=None)
def test_relabeling_inverse_roundtrip(r, w):
    box = chsh_family(w)
    assert max_abs_diff(lro_apply(lro_apply(box, r), r.inverse()), box) <= 1e-15


@given(relabelings, weights)
@settings(max_examples=60, deadline=None)
def test_self_inverse_components_are_involutions(r, w):
    # with either the flip or alpha switched off, a relabeling is its own inverse
    a = PartyRelabeling(r.alice.flip, 0, r.alice.beta)
    b = PartyRelabeling(0, r.bob.alpha, r.bob.beta)
    rr = Relabeling(a, b)
    box = bb84_family(w)
    assert max_abs_diff(lro_apply(lro_apply(box, rr), rr), box) == 0.0


@given(relabelings, weights)
@settings(max_examples=60, deadline=None)
def test_relabeling_preserves_validity(r, w):
    out = lro_apply(chsh_family(w), r)
    assert_allclose(out.p.sum(axis=(2, 3)), 1, atol=1e-15)
    assert bipartite_signaling(out) <= 1e-15


def test_relabeling_group_size():
    assert len(set(all_relabelings())) == 64


def test_lro_equivalent_same_box_identity():
    box = chsh_family(0.4)
    assert lro_equivalent(box, box) == Relabeling()


@pytest.mark.parametrize("v", [0.2, 0.5])
def test_lro_model_table_lambda2_to_bb84(v):
    table = svf_steering_model(v).terms[2].table
    r = lro_equivalent(table, bb84_family(SQ2 * v))
    assert r is not None
    assert max_abs_diff(lro_apply(table, r), bb84_family(SQ2 * v)) <= 1e-12


def test_lro_bb84_vs_chsh_not_equivalent():
    assert lro_equivalent(bb84_family(1), chsh_family(1)) is None


def test_lro_bob_output_flip_on_bb84():
    # b -> b + y flips the sign of the y = 1 row
    flipped = lro_apply(bb84_family(0.5), Relabeling(bob=PartyRelabeling(0, 1, 0)))
    assert flipped(0, 0, 1, 1) == pytest.approx((1 + 0.5) / 4)


# ---------------------------------------------------------------- serialization

def test_json_roundtrip_exact():
    box = svetlichny_family(0.6180339887)
    back = box_from_json(box_to_json(box))
    assert np.array_equal(back.p, box.p)


def test_csv_roundtrip_exact():
    box = born_tripartite(noisy_ghz(0.77), mermin_settings())
    back = box_from_csv(box_to_csv(box))
    assert np.array_equal(back.p, box.p)


def test_json_layout():
    import json

    data = json.loads(box_to_json(mermin_family(0.5)))
    assert len(data) == 8
    assert data[1]["settings"] == [0, 0, 1]
    # outcome order (a, b, c) lexicographic: index 1 is (0, 0, 1)
    assert data[1]["probs"][1] == pytest.approx((1 - 0.5) / 8)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[", "line 1"),
        ("{}", "top level"),
        ('[{"settings": [0,0,0]}]' , "top level"),
    ],
)
def test_json_parse_errors(text, fragment):
    with pytest.raises(BoxFormatError, match=fragment):
        box_from_json(text)


def test_json_field_errors_name_the_field():
    import json

    data = json.loads(box_to_json(uniform_tripartite()))
    data[3]["probs"][2] = "x"
    with pytest.raises(BoxFormatError, match=r"block 3, field 'probs'\[2\]"):
        box_from_json(json.dumps(data))
    del data[5]["settings"]
    data[3]["probs"][2] = 0.125
    with pytest.raises(BoxFormatError, match="block 5: missing field 'settings'"):
        box_from_json(json.dumps(data))


def test_csv_errors_name_the_line():
    lines = box_to_csv(uniform_tripartite()).splitlines()
    lines[4] = "0,0,0,0,1,q,0.125"
    with pytest.raises(BoxFormatError, match="line 5, field 'c'"):
        box_from_csv("\n".join(lines))
    with pytest.raises(BoxFormatError, match="line 1"):
        box_from_csv("x,y\n")


def test_bipartite_box_table_layout():
    box = BipartiteBox.from_table(np.full((4, 4), 0.25))
    assert box.table().shape == (4, 4)
