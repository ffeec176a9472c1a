import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catsense.phase_space import (
    apply_parity,
    cat_normalization,
    cat_overlap,
    coherent_overlap,
    displace_label,
    make_cat,
    parity_expectation,
    parity_label,
    rotate_label,
)
from catsense.oracle import coherent_vector, parity_matrix, truncation_bound

coord = st.floats(-6, 6, allow_nan=False)
labels = st.builds(complex, coord, coord)
angles = st.floats(-math.pi, math.pi, allow_nan=False)


@given(labels)
def test_self_overlap_is_one(a):
    assert coherent_overlap(a, a) == pytest.approx(1, abs=1e-13)


def test_overlap_phase_is_D_sin_theta(alpha50):
    th = 0.01
    phase = cmath.phase(coherent_overlap(alpha50, rotate_label(alpha50, th)))
    assert phase == pytest.approx(50 * math.sin(th), abs=1e-12)
    assert phase == pytest.approx(0.4999916667083, abs=1e-12)


def test_overlap_with_vacuum():
    assert coherent_overlap(0, 2) == pytest.approx(math.exp(-2), abs=1e-15)
    assert abs(coherent_overlap(0, 2)) == pytest.approx(0.135335, abs=1e-6)


def test_labels_must_be_finite():
    with pytest.raises(ValueError):
        coherent_overlap(complex(float("nan"), 0), 1)


@given(labels, labels)
def test_overlap_magnitude_identity(a, b):
    assert abs(coherent_overlap(a, b)) == pytest.approx(math.exp(-abs(a - b) ** 2 / 2), rel=1e-12, abs=1e-300)


@given(labels, labels)
def test_overlap_conjugate_symmetry(a, b):
    assert coherent_overlap(a, b) == pytest.approx(coherent_overlap(b, a).conjugate(), rel=1e-12, abs=1e-300)


def test_rotate_examples():
    a0 = 3 + 0j
    assert rotate_label(a0, 0) == a0
    assert rotate_label(a0, math.pi) == pytest.approx(-a0, abs=1e-15)


@given(labels, angles)
def test_rotation_inverse_and_norm(a, th):
    r = rotate_label(a, th)
    assert abs(r) == pytest.approx(abs(a), rel=1e-15, abs=1e-15)
    assert abs(rotate_label(r, -th) - a) <= 1e-15 * max(1, abs(a)) * 4


def test_displace_vacuum():
    label, phase = displace_label(0, 1.5 - 0.5j)
    assert label == 1.5 - 0.5j
    assert phase == 1


def test_displace_reproduces_signal_mapping(alpha50):
    th = 0.01
    label, phase = displace_label(rotate_label(alpha50, th), -alpha50 / 2)
    assert label == pytest.approx(alpha50 * (2 * cmath.exp(1j * th) - 1) / 2, abs=1e-14)
    assert cmath.phase(phase) == pytest.approx(25 * math.sin(0.01), abs=1e-13)


@given(labels, labels)
def test_displace_inverse(a, beta):
    l1, p1 = displace_label(a, beta)
    l2, p2 = displace_label(l1, -beta)
    assert abs(l2 - a) <= 1e-14
    assert p1 * p2 == pytest.approx(1, abs=1e-13)


@given(labels, labels, labels)
def test_displacement_composition_phase(a, b1, b2):
    l1, p1 = displace_label(a, b1)
    l2, p2 = displace_label(l1, b2)
    l12, p12 = displace_label(a, b1 + b2)
    assert abs(l2 - l12) <= 1e-13
    expected = p12 * cmath.exp(1j * (b2 * b1.conjugate()).imag)
    assert p1 * p2 == pytest.approx(expected, abs=1e-11)


def test_parity_examples():
    assert parity_label(3) == -3
    assert parity_label(0) == 0


@given(labels, angles)
def test_rotation_commutes_with_parity(a, th):
    assert rotate_label(parity_label(a), th) == pytest.approx(parity_label(rotate_label(a, th)), abs=1e-14)


@pytest.mark.parametrize("mean", [0.0, 1.0, 7.5, 16.0, 30.0])
def test_parity_matrix_maps_coherent_to_minus(mean):
    a = math.sqrt(mean) * cmath.exp(0.3j)
    n = truncation_bound(abs(a))
    v = parity_matrix(n) @ coherent_vector(a, n)
    w = coherent_vector(parity_label(a), n)
    fidelity = abs(np.vdot(w, v)) ** 2
    assert fidelity >= 1 - 1e-10


def test_cat_normalization_limits():
    assert cat_normalization(0) == 0.5
    assert cat_normalization(math.sqrt(200)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert cat_normalization(math.sqrt(50)) == pytest.approx((1 + math.exp(-25)) ** -0.5 / math.sqrt(2), rel=1e-15)


@given(st.floats(0, 400, allow_nan=False), angles)
def test_cat_self_overlap_is_one(D, phase):
    n = cat_normalization(math.sqrt(D) * cmath.exp(1j * phase))
    cat = make_cat((0, math.sqrt(D) * cmath.exp(1j * phase)), (n, n), n)
    assert cat_overlap(cat, cat).real == pytest.approx(1, abs=1e-12)
    assert all(abs(c) <= 1 for c in cat.coefficients)


def test_parity_expectation_of_even_cat():
    a = 2.0
    n = 1 / math.sqrt(2 * (1 + math.exp(-2 * a * a)))
    even = make_cat((a, -a), (n, n), n)
    assert parity_expectation(even) == pytest.approx(1, abs=1e-14)
    assert apply_parity(even).labels == (-a, a)
