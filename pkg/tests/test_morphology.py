import numpy as np
import pytest

from conftest import naive_dilate, naive_erode
from granulom.errors import DataError
from granulom.imagecore import GreyImage
from granulom.morphology import (
    FAMILIES,
    StructuringElement,
    area_nonzero,
    closing,
    dilate,
    erode,
    opening,
    se_family,
    volume,
)


def test_structuring_element_validation():
    assert StructuringElement("hex", 3).family == "hexagon"
    with pytest.raises(DataError):
        StructuringElement("octagon", 1)
    with pytest.raises(DataError):
        StructuringElement("square", -1)
    assert se_family("Hex") == "hexagon"


def test_erode_examples():
    const = GreyImage(np.full((5, 5), 42))
    for fam in FAMILIES:
        assert erode(const, StructuringElement(fam, 2)) == const

    px = np.zeros((5, 5), dtype=int)
    px[2, 2] = 255
    out = erode(GreyImage(px), StructuringElement("square", 1))
    assert out.pixels.sum() == 0

    img = GreyImage(np.array([[1, 2, 3], [4, 5, 6], [7, 8, 9]]))
    out = erode(img, StructuringElement("diamond", 1))
    assert out.pixels.tolist() == [[1, 1, 2], [1, 2, 3], [4, 5, 6]]


def test_dilate_examples():
    const = GreyImage(np.full((4, 6), 9))
    assert dilate(const, StructuringElement("diamond", 3)) == const
    px = np.zeros((5, 5), dtype=int)
    px[2, 2] = 255
    out = dilate(GreyImage(px), StructuringElement("square", 1))
    assert np.array_equal(out.pixels[1:4, 1:4], np.full((3, 3), 255))
    assert out.pixels.sum() == 9 * 255


def test_open_close_identity_and_annihilation():
    img = GreyImage(np.arange(30).reshape(5, 6) % 256)
    for fam in FAMILIES:
        se0 = StructuringElement(fam, 0)
        assert opening(img, se0) == img
        assert closing(img, se0) == img
    px = np.zeros((7, 7), dtype=int)
    px[3, 3] = 255
    for fam in FAMILIES:
        assert opening(GreyImage(px), StructuringElement(fam, 1)).pixels.sum() == 0


def test_open_filled_square_survives():
    px = np.zeros((11, 11), dtype=int)
    px[2:9, 2:9] = 255
    out = opening(GreyImage(px), StructuringElement("square", 1))
    assert np.array_equal(out.pixels, px)


def test_volume_and_area():
    assert volume(GreyImage(np.zeros((3, 3), dtype=int))) == 0
    assert volume(GreyImage(np.array([[1, 2], [3, 4]]))) == 10
    binary = np.zeros((6, 6), dtype=int)
    binary.flat[[1, 5, 9, 17, 30]] = 255
    assert area_nonzero(GreyImage(binary)) == 5
    assert area_nonzero(GreyImage(np.zeros((4, 4), dtype=int))) == 0


# --- equality with the direct (set-translation) definition ------------------------

@pytest.mark.parametrize("family", FAMILIES)
def test_iterated_equals_direct_definition(family, rng):
    for _ in range(6):
        px = rng.integers(0, 256, (9, 8))
        img = GreyImage(px)
        for r in range(4):
            se = StructuringElement(family, r)
            assert np.array_equal(erode(img, se).pixels, naive_erode(px, family, r))
            assert np.array_equal(dilate(img, se).pixels, naive_dilate(px, family, r))


# --- axioms ------------------------------------------------------------------------

def _random_images(rng, n, shape=(12, 11)):
    for _ in range(n):
        yield GreyImage(rng.integers(0, 256, shape))


@pytest.mark.parametrize("family", FAMILIES)
def test_idempotence(family, rng):
    for img in _random_images(rng, 4):
        for r in (1, 2, 3):
            se = StructuringElement(family, r)
            once = opening(img, se)
            assert opening(once, se) == once
            conce = closing(img, se)
            assert closing(conce, se) == conce


@pytest.mark.parametrize("family", FAMILIES)
def test_extensivity_ordering(family, rng):
    for img in _random_images(rng, 4):
        for r in (1, 3):
            se = StructuringElement(family, r)
            assert (opening(img, se).pixels <= img.pixels).all()
            assert (closing(img, se).pixels >= img.pixels).all()


@pytest.mark.parametrize("family", FAMILIES)
def test_increasingness(family, rng):
    for _ in range(4):
        f = rng.integers(0, 200, (10, 10))
        g = f + rng.integers(0, 56, (10, 10))  # g >= f pointwise
        se = StructuringElement(family, 2)
        assert (opening(GreyImage(f), se).pixels <= opening(GreyImage(g), se).pixels).all()


@pytest.mark.parametrize("family", FAMILIES)
def test_sieve_property(family, rng):
    for img in _random_images(rng, 3):
        for r in (0, 1, 2, 3):
            for s in (0, 1, 2, 3):
                lhs = opening(opening(img, StructuringElement(family, r)),
                              StructuringElement(family, s))
                rhs = opening(img, StructuringElement(family, max(r, s)))
                assert lhs == rhs


@pytest.mark.parametrize("family", FAMILIES)
def test_duality(family, rng):
    for img in _random_images(rng, 4):
        se = StructuringElement(family, 2)
        complement = GreyImage(255 - img.pixels)
        assert np.array_equal(
            closing(img, se).pixels, 255 - opening(complement, se).pixels
        )
        assert np.array_equal(
            dilate(img, se).pixels, 255 - erode(complement, se).pixels
        )


def test_anti_extensive_volume(rng):
    for img in _random_images(rng, 3):
        for fam in FAMILIES:
            se = StructuringElement(fam, 2)
            assert volume(opening(img, se)) <= volume(img)
