import numpy as np
import pytest

from densify.errors import InconsistentRegionsError, InvalidArgumentError, SingularityError
from densify.propagation import (
    BANDS,
    BoundedForm,
    ModelFamily,
    PathlossModel,
    Region,
    classify_region,
    field_regions,
    fraunhofer_mismatch,
    fraunhofer_range,
    gain,
    gain_db,
    make_model,
    wavelength,
)

ALL_MODELS = [
    make_model("bpm", [], [4.0]),
    make_model("bpm", [12.5], [2.0, 4.0]),
    make_model("bpm", [3.3], [1.5, 3.5]),
    make_model("bpm", [1.0, 20.0], [2.0, 3.0, 4.5]),
    make_model("upm", [1.0], [2.0, 4.0]),
    make_model("upm", [3.3, 40.0], [1.5, 3.5, 2.5]),
    make_model("bpm", [5.0], [2.0, 4.0], form="one_plus_distance"),
    make_model("bpm", [5.0], [2.0, 4.0], form="unit_clamp"),
]


# --------------------------------------------------------------------------- #
# wavelength & regions                                                        #
# --------------------------------------------------------------------------- #
@pytest.mark.parametrize(
    "freq, expected",
    [(1.93e9, 0.1553), (2.0e9, 0.1499), (2.4e9, 0.1249)],
)
def test_wavelength(freq, expected):
    assert wavelength(freq) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_wavelength_rejects_non_positive(bad):
    with pytest.raises(InvalidArgumentError):
        wavelength(bad)


def test_fraunhofer_at_band2_edges():
    assert field_regions(1.93e9, 1.5, 10, 1.5).fraunhofer_m == pytest.approx(28.96, abs=0.02)
    assert field_regions(1.99e9, 1.5, 10, 1.5).fraunhofer_m == pytest.approx(29.87, abs=0.02)


def test_reactive_and_critical_boundaries():
    regions = field_regions(2.998e8 / 0.15, 1.0, 1.0, 1.0)
    assert regions.reactive_boundary_m == pytest.approx(0.02387, abs=1e-5)
    assert field_regions(9e8, 1.0, 1.0, 1.0).critical_m == pytest.approx(12.01, abs=0.01)


def test_field_regions_rejects_non_positive_input():
    with pytest.raises(InvalidArgumentError):
        field_regions(1.93e9, 0.0, 1.0, 1.0)


def test_long_antenna_orders_reactive_below_fraunhofer():
    regions = field_regions(1.93e9, 1.5, 10, 1.5)
    assert regions.electrically_long
    assert regions.reactive_boundary_m < regions.fraunhofer_m


def test_classify_region_boundaries_belong_inside():
    regions = field_regions(1.93e9, 1.5, 10, 1.5)
    assert classify_region(0.0, regions) is Region.REACTIVE_NEAR_FIELD
    assert classify_region(regions.reactive_boundary_m, regions) is Region.REACTIVE_NEAR_FIELD
    assert classify_region(regions.fraunhofer_m, regions) is Region.RADIATIVE_NEAR_FIELD
    assert classify_region(regions.critical_m, regions) is Region.FAR_FIELD_WITHIN_CRITICAL
    assert classify_region(regions.critical_m * 2, regions) is Region.FAR_FIELD_BEYOND_CRITICAL


def test_classify_region_rejects_crossed_boundaries():
    # R_F ≈ 29 m but R_C ≈ 4·1·1/0.155 ≈ 26 m
    regions = field_regions(1.93e9, 1.5, 1.0, 1.0)
    assert regions.critical_m < regions.fraunhofer_m
    with pytest.raises(InconsistentRegionsError):
        classify_region(5.0, regions)


def test_band_catalog_fraunhofer_ranges():
    low, high = fraunhofer_range(BANDS["band2"])
    assert 28.9 <= low < high <= 29.9
    assert fraunhofer_mismatch(BANDS["band2"]) is None

    low4, _ = fraunhofer_range(BANDS["band4"])
    low38, _ = fraunhofer_range(BANDS["band38"])
    assert low4 == pytest.approx(14.0, abs=0.2)
    assert low38 == pytest.approx(4.3, abs=0.1)
    assert "band4" in fraunhofer_mismatch(BANDS["band4"])
    assert "band38" in fraunhofer_mismatch(BANDS["band38"])


# --------------------------------------------------------------------------- #
# model construction                                                          #
# --------------------------------------------------------------------------- #
def test_single_slope_has_unit_eta():
    assert make_model("bpm", [], [4]).continuity_factors == (1.0,)


def test_bounded_eta_matches_product_formula():
    model = make_model("bpm", [12.5], [2, 4])
    assert model.continuity_factors[1] == pytest.approx((1 + 12.5**4) / (1 + 12.5**2), rel=1e-12)
    assert model.continuity_factors[1] == pytest.approx(155.26, abs=0.01)

    three = make_model("bpm", [1.0, 20.0], [2.0, 3.0, 4.5])
    expected = (1 + 1.0**3) / (1 + 1.0**2) * (1 + 20.0**4.5) / (1 + 20.0**3)
    assert three.continuity_factors[2] == pytest.approx(expected, rel=1e-12)


def test_unbounded_eta_matches_power_formula():
    assert make_model("upm", [1.0], [2, 4]).continuity_factors == (1.0, 1.0)
    model = make_model("upm", [3.3], [1.5, 3.5])
    assert model.continuity_factors[1] == pytest.approx(3.3**2.0, rel=1e-12)


@pytest.mark.parametrize(
    "breakpoints, exponents",
    [
        ([], []),
        ([1.0], [2.0]),
        ([2.0, 1.0], [2.0, 3.0, 4.0]),
        ([1.0, 1.0], [2.0, 3.0, 4.0]),
        ([0.0], [2.0, 4.0]),
        ([], [0.0]),
        ([], [10.5]),
    ],
)
def test_make_model_rejects_invalid(breakpoints, exponents):
    with pytest.raises(InvalidArgumentError):
        make_model("bpm", breakpoints, exponents)


def test_unknown_family():
    with pytest.raises(InvalidArgumentError):
        make_model("xpm", [], [2])


def test_model_dict_round_trip():
    model = make_model("bpm", [5.0], [2.0, 4.0], form="unit_clamp")
    spec = model.to_dict()
    assert spec == {"family": "bpm", "breakpoints_m": [5.0], "exponents": [2.0, 4.0], "form": "unit_clamp"}
    assert PathlossModel.from_dict(spec) == model


# --------------------------------------------------------------------------- #
# gain                                                                        #
# --------------------------------------------------------------------------- #
def test_gain_examples():
    model = make_model("bpm", [12.5], [2, 4])
    assert gain(model, 12.5) == pytest.approx(0.006359, abs=1e-6)
    assert gain(model, 0.0) == 1.0
    assert gain(make_model("upm", [], [4]), 0.5) == pytest.approx(16.0)


def test_gain_db_examples():
    assert gain_db(make_model("bpm", [], [4]), 0.0) == 0.0
    assert gain_db(make_model("upm", [], [4]), 0.5) == pytest.approx(12.04, abs=0.005)
    assert gain_db(make_model("bpm", [12.5], [2, 4]), 12.5) == pytest.approx(-21.97, abs=0.005)


def test_unbounded_singular_at_zero():
    with pytest.raises(SingularityError):
        gain(make_model("upm", [], [4]), 0.0)
    with pytest.raises(SingularityError):
        gain(make_model("upm", [], [4]), np.array([1.0, 0.0]))


def test_negative_distance_rejected():
    with pytest.raises(InvalidArgumentError):
        gain(make_model("bpm", [], [4]), -1.0)


def test_array_and_scalar_agree():
    model = make_model("bpm", [3.3], [1.5, 3.5])
    d = np.array([0.1, 1.0, 3.3, 10.0])
    np.testing.assert_allclose(gain(model, d), [gain(model, float(x)) for x in d], rtol=1e-15)
    assert isinstance(gain(model, 1.0), float)


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.describe() + m.form.value)
def test_continuity_at_breakpoints(model):
    for r in model.breakpoints_m:
        eps = 1e-9 * r
        left, right = gain(model, r - eps), gain(model, r + eps)
        assert abs(left - right) / gain(model, r) < 1e-6
        # the segment formula on the far side lands on the same value
        assert gain(model, r) == pytest.approx(gain(model, np.nextafter(r, np.inf)), rel=1e-12)


def test_bounded_gain_in_unit_interval():
    d = np.concatenate(([0.0], np.logspace(-3, 6, 400)))
    for model in ALL_MODELS:
        if model.bounded:
            g = gain(model, d)
            assert np.all(g > 0) and np.all(g <= 1.0)


@pytest.mark.parametrize(
    "model", [m for m in ALL_MODELS if m.form is not BoundedForm.UNIT_CLAMP], ids=lambda m: m.describe()
)
def test_gain_strictly_decreasing(model):
    d = np.logspace(-2, 4, 500)
    assert np.all(np.diff(gain(model, d)) < 0)


def test_unit_clamp_is_flat_inside_one_metre():
    model = make_model("bpm", [5.0], [2.0, 4.0], form="unit_clamp")
    assert np.all(gain(model, np.linspace(0.0, 1.0, 11)) == 1.0)
    assert np.all(np.diff(gain(model, np.logspace(0, 3, 100))) <= 0)


def test_bounded_dominated_by_unbounded():
    # breakpoints >= 1 m keep the bounded continuity factors below the unbounded ones
    d = np.logspace(-2, 4, 300)
    for bps, exps in [([], [4.0]), ([12.5], [2.0, 4.0]), ([1.0], [2.0, 4.0])]:
        bpm = gain(make_model(ModelFamily.BOUNDED, bps, exps), d)
        upm = gain(make_model(ModelFamily.UNBOUNDED, bps, exps), d)
        assert np.all(bpm <= upm)


def test_single_slope_bounded_is_exact():
    model = make_model("bpm", [], [3.0])
    d = np.logspace(-2, 3, 50)
    np.testing.assert_allclose(gain(model, d), 1.0 / (1.0 + d**3.0), rtol=1e-14)
