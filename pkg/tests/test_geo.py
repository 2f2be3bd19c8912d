import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distrag.errors import DuplicateCity, EmptyGazetteer, MalformedRow, MissingFile
from distrag.geo import EARTH_RADIUS_KM, City, Gazetteer, GeoPoint, geocode, geodesic_km, load_gazetteer

from oracles import chord_km

HEADER = "name,region,lat,lon,population\n"

points = st.builds(
    GeoPoint,
    st.floats(-90, 90, allow_nan=False),
    st.floats(-180, 180, allow_nan=False),
)


def write(tmp_path, body, name="g.csv"):
    p = tmp_path / name
    p.write_text(HEADER + body, encoding="utf-8")
    return p


def test_load_row_renders_name_with_region(tmp_path):
    g = load_gazetteer(write(tmp_path, "Newcastle,NSW,-32.9283,151.7817,322278\n"))
    (city,) = g.cities
    assert city.name == "Newcastle, NSW"
    assert city.canonical_key == "newcastle,_nsw"
    assert city.population == 322278
    assert city.point == GeoPoint(-32.9283, 151.7817)


def test_blank_population_is_none(tmp_path):
    g = load_gazetteer(write(tmp_path, "Perth,WA,-31.95,115.86,\n"))
    assert g.cities[0].population is None


def test_header_only_is_empty(tmp_path):
    with pytest.raises(EmptyGazetteer):
        load_gazetteer(write(tmp_path, ""))


def test_duplicate_keys_rejected(tmp_path):
    body = "Sydney,NSW,-33.87,151.21,1\nsydney,nsw,-33.80,151.00,2\n"
    with pytest.raises(DuplicateCity) as exc:
        load_gazetteer(write(tmp_path, body))
    assert exc.value.key == "sydney,_nsw"


@pytest.mark.parametrize("row", [
    "Bad,XX,north,151.0,\n",
    "Bad,XX,95.0,151.0,\n",
    "Bad,XX,-30.0,200.0,\n",
    "Bad,XX,-30.0\n",
    "Bad,XX,nan,10,\n",
])
def test_malformed_rows_report_line(tmp_path, row):
    body = "Ok,XX,-30.0,150.0,\n" + row
    with pytest.raises(MalformedRow) as exc:
        load_gazetteer(write(tmp_path, body))
    assert exc.value.line == 3


def test_missing_file(tmp_path):
    with pytest.raises(MissingFile):
        load_gazetteer(tmp_path / "nope.csv")


def test_file_order_preserved(au50):
    assert au50.cities[0].name == "Adelaide, SA"
    assert au50.cities[1].name == "Perth, WA"
    assert len(au50) == 50


@pytest.mark.parametrize("query, expected", [
    ("Mount_Isa, QLD", "Mount Isa, QLD"),
    ("mount isa, qld", "Mount Isa, QLD"),
    ("  Mount_Isa,_QLD.  ", "Mount Isa, QLD"),
    ("Perth", "Perth, WA"),
    ("Wagga_Wagga", "Wagga Wagga, NSW"),
])
def test_geocode_normalization(au50, query, expected):
    assert geocode(query, au50).name == expected


@pytest.mark.parametrize("query", ["", "   ", "Atlantis", "Perth, TAS", "."])
def test_geocode_absent(au50, query):
    assert geocode(query, au50) is None


def test_geocode_ambiguous_name_part_is_absent():
    g = Gazetteer([City("Perth, WA", GeoPoint(-31.95, 115.86)), City("Perth, TAS", GeoPoint(-41.57, 147.17))])
    assert geocode("Perth", g) is None
    assert geocode("Perth, TAS", g).name == "Perth, TAS"


def test_geocode_round_trip(au50):
    for city in au50:
        assert geocode(city.name, au50) is city


def test_geopoint_validation():
    with pytest.raises(ValueError):
        GeoPoint(91, 0)
    with pytest.raises(ValueError):
        GeoPoint(0, -181)
    with pytest.raises(ValueError):
        GeoPoint(float("inf"), 0)


ADELAIDE = GeoPoint(-34.9285, 138.6007)
PERTH = GeoPoint(-31.9523, 115.8613)
SYDNEY = GeoPoint(-33.8688, 151.2093)
MELBOURNE = GeoPoint(-37.8136, 144.9631)


def test_adelaide_perth_within_one_percent_of_2135():
    d = geodesic_km(ADELAIDE, PERTH)
    assert abs(d - 2135) / 2135 < 0.01
    # value frozen from the chord oracle
    assert d == pytest.approx(2130.99, abs=0.01)


def test_sydney_melbourne_matches_oracle():
    expected = chord_km(-33.8688, 151.2093, -37.8136, 144.9631)
    assert expected == pytest.approx(713.43, abs=0.01)
    assert geodesic_km(SYDNEY, MELBOURNE) == pytest.approx(expected, rel=1e-9)


def test_identity_is_zero():
    assert geodesic_km(ADELAIDE, ADELAIDE) == 0.0


@settings(max_examples=300)
@given(points, points)
def test_symmetry_is_exact_and_bounded(a, b):
    d = geodesic_km(a, b)
    assert d == geodesic_km(b, a)
    assert 0.0 <= d <= math.pi * EARTH_RADIUS_KM


@settings(max_examples=300)
@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert geodesic_km(a, c) <= geodesic_km(a, b) + geodesic_km(b, c) + 1e-6


@settings(max_examples=200)
@given(points, points)
def test_agrees_with_chord_oracle(a, b):
    assert geodesic_km(a, b) == pytest.approx(chord_km(a.lat, a.lon, b.lat, b.lon), abs=1e-6)
