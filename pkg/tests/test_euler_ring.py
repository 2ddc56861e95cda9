"""Euler ring of the circle: laws, sphere classes, induction, text grammar."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapcenter.euler_ring import (
    RING_ONE,
    RING_ZERO,
    EulerRingElement,
    LabelingError,
    NotInvertibleError,
    S1Representation,
    UGElement,
    chi_sphere,
    induce_to_G,
    invert,
    parse_euler_expr,
    parse_rep,
    ring_add,
    ring_mul,
)


def ring_elements(max_coeff=10, max_mode=6):
    torus = st.dictionaries(st.integers(1, max_mode),
                            st.integers(-max_coeff, max_coeff), max_size=4)
    return st.builds(lambda u, t: EulerRingElement.build(u, t),
                     st.integers(-max_coeff, max_coeff), torus)


def representations():
    modes = st.dictionaries(st.integers(1, 5), st.integers(1, 3), max_size=3)
    return st.builds(lambda d, m: S1Representation.build(d, m),
                     st.integers(0, 4), modes)


@given(ring_elements(), ring_elements(), ring_elements())
@settings(max_examples=200, deadline=None)
def test_ring_laws(x, y, z):
    assert ring_add(x, y) == ring_add(y, x)
    assert ring_add(ring_add(x, y), z) == ring_add(x, ring_add(y, z))
    assert ring_add(x, RING_ZERO) == x
    assert ring_add(x, -x) == RING_ZERO
    assert ring_mul(x, y) == ring_mul(y, x)
    assert ring_mul(ring_mul(x, y), z) == ring_mul(x, ring_mul(y, z))
    assert ring_mul(x, RING_ONE) == x
    assert ring_mul(x, ring_add(y, z)) == ring_add(ring_mul(x, y), ring_mul(x, z))


@given(ring_elements(), ring_elements())
@settings(max_examples=100, deadline=None)
def test_torus_parts_annihilate(x, y):
    a = EulerRingElement.build(0, x.torus_dict())
    b = EulerRingElement.build(0, y.torus_dict())
    assert a * b == RING_ZERO


@given(representations(), representations())
@settings(max_examples=150, deadline=None)
def test_chi_sphere_multiplicative_over_direct_sum(v, w):
    assert chi_sphere(v.direct_sum(w)) == chi_sphere(v) * chi_sphere(w)


def test_chi_sphere_known_values():
    assert chi_sphere(S1Representation()) == RING_ONE
    # one trivial direction flips the sign of I
    assert chi_sphere(parse_rep("R[1,0]")) == EulerRingElement.build(-1)
    assert chi_sphere(parse_rep("R[1,0]+R[2,3]")) == EulerRingElement.build(-1, {3: 2})
    assert chi_sphere(parse_rep("R[2,0]+R[2,1]")) == EulerRingElement.build(1, {1: -2})


@given(ring_elements(max_coeff=5))
@settings(max_examples=100, deadline=None)
def test_invert_units(x):
    unit = EulerRingElement.build(1 if x.unit % 2 == 0 else -1, x.torus_dict())
    assert ring_mul(unit, invert(unit)) == RING_ONE


def test_invert_rejects_nonunits():
    for u in (0, 2, -3):
        with pytest.raises(NotInvertibleError):
            invert(EulerRingElement.build(u, {2: 1}))


class TestRepresentations:
    def test_parse_and_text_round_trip(self):
        for text in ["0", "R[1,0]", "R[2,0]+R[2,1]", "R[1,0]+R[2,3]+R[1,5]"]:
            assert parse_rep(text).text() == text

    def test_duplicate_modes_merge(self):
        rep = parse_rep("R[1,2]+R[3,2]")
        assert rep.modes == ((4, 2),)

    def test_dim_counts_rotation_modes_twice(self):
        assert parse_rep("R[3,0]+R[2,5]").dim == 7

    def test_rejects_malformed(self):
        with pytest.raises(ValueError):
            parse_rep("R[1;0]")

    def test_direct_sum(self):
        a = parse_rep("R[1,0]+R[1,2]")
        b = parse_rep("R[2,0]+R[1,2]+R[1,3]")
        assert a.direct_sum(b).text() == "R[3,0]+R[2,2]+R[1,3]"


class TestInduction:
    def test_coefficients_are_preserved(self):
        x = EulerRingElement.build(-1, {1: 2, 3: -5})
        out = induce_to_G(x)
        assert out.coeff_dict() == {"(S1)": -1, "(Z1)": 2, "(Z3)": -5}

    def test_collapsing_labeling_is_refused(self):
        x = EulerRingElement.build(1, {2: 1})
        with pytest.raises(LabelingError):
            induce_to_G(x, {"S1": "(A)", 2: "(A)"})

    def test_missing_label_is_refused(self):
        x = EulerRingElement.build(1, {2: 1})
        with pytest.raises(LabelingError):
            induce_to_G(x, {"S1": "(A)"})

    @given(ring_elements(), ring_elements())
    @settings(max_examples=100, deadline=None)
    def test_induction_is_additive(self, x, y):
        assert induce_to_G(x + y) == induce_to_G(x) + induce_to_G(y)


class TestTextForms:
    @pytest.mark.parametrize("text, value", [
        ("0", RING_ZERO),
        ("I", RING_ONE),
        ("-I + 2*Z3", EulerRingElement.build(-1, {3: 2})),
        ("3*I - Z2", EulerRingElement.build(3, {2: -1})),
        ("2*Z3", EulerRingElement.build(0, {3: 2})),
        ("(I + Z1)*(I - Z1)", RING_ONE),
        ('chi(S^"R[1,0]+R[2,3]")', EulerRingElement.build(-1, {3: 2})),
        ('inv(-I + 2*Z3) * (-I + 2*Z3)', RING_ONE),
        ("2 - 3", EulerRingElement.build(-1)),
    ])
    def test_expression_evaluation(self, text, value):
        assert parse_euler_expr(text) == value

    @given(ring_elements())
    @settings(max_examples=150, deadline=None)
    def test_text_round_trip(self, x):
        assert parse_euler_expr(x.text()) == x

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_euler_expr("I I")

    def test_bad_character_rejected(self):
        with pytest.raises(ValueError):
            parse_euler_expr("I @ Z2")

    def test_chi_requires_quoted_rep(self):
        with pytest.raises(ValueError):
            parse_euler_expr("chi(S^R[1,0])")


def test_ug_element_text():
    x = UGElement.build({"(S1)": -1, "(Z3)": 2})
    assert x.text() == "-(S1) + 2*(Z3)"
    assert UGElement.build({}).text() == "0"
