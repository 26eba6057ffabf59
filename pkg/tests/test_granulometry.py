import numpy as np
import pytest

from conftest import translate_opening_binary, translate_opening_grey, umbra_si_cell
from granulom.errors import DataError
from granulom.granulometry import (
    GranulometryCurve,
    export_curve,
    granulometry_closings,
    granulometry_openings,
    read_curve_csv,
    read_diagram_csv,
    size_intensity,
)
from granulom.imagecore import GreyImage


def test_constant_image_curves_are_zero():
    img = GreyImage(np.full((6, 6), 77))
    for fam in ("hexagon", "square", "diamond"):
        assert granulometry_openings(img, fam, 4).values == (0.0,) * 5
        assert granulometry_closings(img, fam, 4).values == (0.0,) * 5


def test_single_pixel_annihilated():
    px = np.zeros((5, 5), dtype=int)
    px[2, 2] = 255
    curve = granulometry_openings(GreyImage(px), "hexagon", 3)
    assert curve.values == (0.0, 1.0, 1.0, 1.0)


def test_side7_square_jump_between_3_and_4():
    px = np.zeros((15, 15), dtype=int)
    px[4:11, 4:11] = 255
    curve = granulometry_openings(GreyImage(px), "square", 5)
    assert curve.values[:4] == (0.0, 0.0, 0.0, 0.0)
    assert curve.values[4] == 1.0 and curve.values[5] == 1.0


def test_errors():
    with pytest.raises(DataError):
        granulometry_openings(GreyImage(np.zeros((3, 3), dtype=int)), "hex", 2)
    with pytest.raises(DataError):
        granulometry_closings(GreyImage(np.full((3, 3), 255)), "hex", 2)


def test_single_pit_closing():
    px = np.full((5, 5), 255)
    px[2, 2] = 0
    curve = granulometry_closings(GreyImage(px), "square", 3)
    assert curve.values == (0.0, 1.0, 1.0, 1.0)


def test_closing_equals_opening_of_complement(rng):
    for _ in range(5):
        px = rng.integers(1, 255, (8, 8))
        img = GreyImage(px)
        comp = GreyImage(255 - px)
        for fam in ("hexagon", "square", "diamond"):
            closing_curve = granulometry_closings(img, fam, 4)
            opening_curve = granulometry_openings(comp, fam, 4)
            assert closing_curve.values == opening_curve.values


def test_curve_monotone_and_bounded(rng):
    for _ in range(5):
        img = GreyImage(rng.integers(0, 256, (10, 10)))
        curve = granulometry_openings(img, "hexagon", 6)
        values = np.array(curve.values)
        assert values[0] == 0.0
        assert (np.diff(values) >= 0).all()
        assert (values <= 1.0).all() and (values >= 0.0).all()


def test_openings_match_set_translation_oracle(rng):
    for i in range(8):
        family = ("hexagon", "square", "diamond")[i % 3]
        px = rng.integers(0, 256, (8, 8))
        img = GreyImage(px)
        total = int(px.sum())
        curve = granulometry_openings(img, family, 3)
        for r in range(4):
            opened = translate_opening_grey(px, family, r)
            expected = (total - int(opened.sum())) / total
            assert curve.values[r] == expected


# --- size-intensity ---------------------------------------------------------------

def test_si_column_zero_is_survival_histogram():
    img = GreyImage(np.array([[0, 1], [2, 2]]))
    si = size_intensity(img, "hexagon", 2, k_max=3)
    assert si.value(0, 1) == 3
    assert si.value(0, 2) == 2
    assert si.value(0, 3) == 0


def test_si_constant_image():
    img = GreyImage(np.full((3, 3), 2))
    si = size_intensity(img, "square", 2, k_max=4)
    for r in range(3):
        for k in (1, 2):
            assert si.value(r, k) == 9
        for k in (3, 4):
            assert si.value(r, k) == 0


def test_si_rows_match_binary_opening_oracle(rng):
    for i in range(4):
        family = ("hexagon", "square", "diamond")[i % 3]
        px = rng.integers(0, 8, (8, 8))
        si = size_intensity(GreyImage(px), family, 3, k_max=7)
        for k in range(1, 8):
            mask = px >= k
            for r in range(4):
                oracle = int(translate_opening_binary(mask, family, r).sum())
                assert si.value(r, k) == oracle


def test_si_matches_umbra_oracle(rng):
    for i in range(3):
        family = ("hexagon", "square", "diamond")[i % 3]
        px = rng.integers(0, 17, (8, 8))
        si = size_intensity(GreyImage(px), family, 2, k_max=16)
        for r in range(3):
            for k in range(1, 17):
                assert si.value(r, k) == umbra_si_cell(px, family, r, k), (family, r, k)


def test_si_monotone_both_axes(rng):
    for _ in range(4):
        px = rng.integers(0, 40, (10, 10))
        si = size_intensity(GreyImage(px), "hexagon", 4, k_max=40)
        cells = si.cells
        assert (np.diff(cells, axis=0) <= 0).all()  # non-increasing in r
        assert (np.diff(cells, axis=1) <= 0).all()  # non-increasing in k
        assert cells.max() <= 100


def test_si_levels_stride():
    px = np.arange(64, dtype=int).reshape(8, 8) % 32
    full = size_intensity(GreyImage(px), "square", 2, k_max=31)
    strided = size_intensity(GreyImage(px), "square", 2, k_max=31, k_step=5)
    assert strided.levels == (1, 6, 11, 16, 21, 26, 31)
    for col, k in enumerate(strided.levels):
        assert np.array_equal(strided.cells[:, col], full.cells[:, k - 1])


# --- export -----------------------------------------------------------------------

def test_export_curve_roundtrip(tmp_path):
    curve = GranulometryCurve("hexagon", "openings", (0, 1), (0.0, 0.25))
    path = tmp_path / "curve.csv"
    export_curve(curve, path)
    text = path.read_text()
    assert text.splitlines()[0] == "r,value"
    assert len(text.splitlines()) == 3
    sizes, values = read_curve_csv(path)
    assert sizes == curve.sizes and values == curve.values


def test_export_diagram_shape(tmp_path):
    img = GreyImage(np.array([[0, 1], [2, 2]]))
    si = size_intensity(img, "hexagon", 1, k_max=2)
    path = tmp_path / "si.csv"
    export_curve(si, path)
    rows = read_diagram_csv(path)
    assert len(rows) == 4  # (r_max+1) * k_max
    assert rows[0] == (0, 1, 3)
