from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from subdivflow.lattice import (
    DilationMatrix,
    as_rational,
    box_points,
    coset_decompose,
    coset_representatives,
    format_rational,
)

SHEAR = DilationMatrix(((2, 1), (0, 2)))
TWO = DilationMatrix.scalar(2, 2)


def test_cosets_shear():
    reps = coset_representatives(SHEAR)
    # (1,2) = M e2 lies in the trivial coset, so (2,1) takes its place
    assert reps == [(0, 0), (1, 0), (1, 1), (2, 1)]
    assert coset_decompose((1, 2), SHEAR) == ((0, 0), (0, 1))


def test_cosets_two():
    assert coset_representatives(TWO) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert coset_representatives(DilationMatrix.scalar(2, 1)) == [(0,), (1,)]


def test_cosets_level_count():
    assert len(coset_representatives(SHEAR, 3)) == 64


def test_decompose_examples():
    M1 = DilationMatrix.scalar(2, 1)
    assert coset_decompose((5,), M1) == ((1,), (2,))
    assert coset_decompose((0, 0), SHEAR, 2) == ((0, 0), (0, 0))
    assert coset_decompose((3, 1), SHEAR) == ((1, 1), (1, 0))


def test_power_and_det():
    assert SHEAR.det == 4
    assert SHEAR.power(2).entries == ((4, 4), (0, 4))
    assert SHEAR.power(2).det == 16
    assert DilationMatrix(((1, 1), (-1, 1))).det == 2


@pytest.mark.parametrize("entries", [((1, 0), (0, 1)), ((2, 0), (0, 1)), ((1, 2), (3, 4, 5)), ((1, 1), (0, 1))])
def test_rejects_bad_dilations(entries):
    with pytest.raises(ValueError):
        DilationMatrix(entries)


def test_rational_helpers():
    assert as_rational("3/4") == Fraction(3, 4)
    assert format_rational(Fraction(-6, 16)) == "-3/8"
    assert format_rational(Fraction(4, 2)) == "2"
    with pytest.raises(ValueError):
        as_rational("0.5")


def test_box_points_order():
    assert box_points((0, 0), (1, 1)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


MATS = st.sampled_from([SHEAR, TWO, DilationMatrix(((1, 1), (-1, 1))), DilationMatrix(((0, 2), (1, 0))),
                        DilationMatrix(((3, 0), (0, 2)))])


@settings(max_examples=150, deadline=None)
@given(MATS, st.integers(1, 2), st.tuples(st.integers(-40, 40), st.integers(-40, 40)))
def test_decompose_roundtrip(M, r, alpha):
    eps, beta = coset_decompose(alpha, M, r)
    P = M.power(r)
    assert tuple(e + b for e, b in zip(eps, P.apply(beta))) == alpha
    assert eps in coset_representatives(M, r)
