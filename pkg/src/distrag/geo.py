"""Gazetteer loading, place-name geocoding and great-circle distances."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from distrag.errors import DuplicateCity, EmptyGazetteer, MalformedRow, MissingFile

EARTH_RADIUS_KM = 6371.0088
MAX_DISTANCE_KM = math.pi * EARTH_RADIUS_KM

GAZETTEER_HEADER = ["name", "region", "lat", "lon", "population"]


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


def normalize_name(text: str) -> str:
    """Normalize a free-form place name into canonical-key form.

    Spaces and underscores are interchangeable, case is dropped and a
    trailing period is ignored, so ``"Mount_Isa, QLD."`` and
    ``"mount isa, qld"`` normalize identically.
    """
    text = text.strip()
    if text.endswith("."):
        text = text[:-1].rstrip()
    text = text.replace("_", " ")
    text = " ".join(text.split())
    return text.lower().replace(" ", "_")


def canonical_key(name: str) -> str:
    return normalize_name(name)


@dataclass(frozen=True)
class City:
    name: str
    point: GeoPoint
    population: Optional[int] = None
    canonical_key: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "canonical_key", canonical_key(self.name))

    @property
    def name_part(self) -> str:
        return self.canonical_key.split(",", 1)[0]


class Gazetteer:
    """Ordered, immutable collection of cities indexed by canonical key."""

    def __init__(self, cities: Iterable[City]):
        cities = tuple(cities)
        index = {}
        for city in cities:
            if city.canonical_key in index:
                raise DuplicateCity(city.canonical_key)
            index[city.canonical_key] = city
        self._cities = cities
        self._index = index
        by_name_part: dict[str, list[City]] = {}
        for city in cities:
            by_name_part.setdefault(city.name_part, []).append(city)
        self._by_name_part = by_name_part

    @property
    def cities(self) -> tuple[City, ...]:
        return self._cities

    @property
    def index(self) -> dict[str, City]:
        return dict(self._index)

    def __len__(self):
        return len(self._cities)

    def __iter__(self):
        return iter(self._cities)

    def __contains__(self, key):
        return key in self._index

    def __getitem__(self, key: str) -> City:
        return self._index[key]

    def get(self, key: str) -> Optional[City]:
        return self._index.get(key)

    def __eq__(self, other):
        if not isinstance(other, Gazetteer):
            return NotImplemented
        return self._cities == other._cities

    def __repr__(self):
        return f"Gazetteer({len(self)} cities)"

    def _lookup_name_part(self, name_part: str) -> Optional[City]:
        matches = self._by_name_part.get(name_part, [])
        return matches[0] if len(matches) == 1 else None


def city_display_name(name: str, region: str) -> str:
    name, region = name.strip(), region.strip()
    return f"{name}, {region}" if region else name


def load_gazetteer(path) -> Gazetteer:
    """Read a ``name,region,lat,lon,population`` CSV into a Gazetteer."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"gazetteer not found: {path}")
    cities = []
    seen = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyGazetteer(f"{path} is empty")
        if [h.strip().lower() for h in header] != GAZETTEER_HEADER:
            raise MalformedRow(1, f"expected header {','.join(GAZETTEER_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(GAZETTEER_HEADER):
                raise MalformedRow(line, f"expected 5 fields, got {len(row)}")
            name, region, lat, lon, population = row
            if not name.strip():
                raise MalformedRow(line, "empty name")
            try:
                point = GeoPoint(float(lat), float(lon))
            except ValueError as exc:
                raise MalformedRow(line, str(exc)) from None
            try:
                pop = int(population) if population.strip() else None
            except ValueError:
                raise MalformedRow(line, f"bad population {population!r}") from None
            city = City(city_display_name(name, region), point, pop)
            if city.canonical_key in seen:
                raise DuplicateCity(city.canonical_key)
            seen.add(city.canonical_key)
            cities.append(city)
    if not cities:
        raise EmptyGazetteer(f"{path} has no rows")
    return Gazetteer(cities)


def write_gazetteer(g: Gazetteer, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GAZETTEER_HEADER)
        for city in g:
            name, _, region = city.name.partition(", ")
            writer.writerow([
                name,
                region,
                repr(city.point.lat),
                repr(city.point.lon),
                "" if city.population is None else city.population,
            ])
    os.replace(tmp, path)


def geocode(name: str, g: Gazetteer) -> Optional[City]:
    """Resolve a place name against the gazetteer, or return None."""
    if not isinstance(name, str):
        return None
    key = normalize_name(name)
    if not key:
        return None
    city = g.get(key)
    if city is not None:
        return city
    if "," not in key:
        return g._lookup_name_part(key)
    return None


def geodesic_km(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine great-circle distance in km on the mean-radius sphere."""
    phi_a, phi_b = math.radians(a.lat), math.radians(b.lat)
    # abs() of the differences keeps the result bitwise symmetric in (a, b)
    dphi = abs(phi_a - phi_b)
    dlam = abs(math.radians(a.lon) - math.radians(b.lon))
    h = math.sin(dphi / 2) ** 2 + (math.cos(phi_a) * math.cos(phi_b)) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))
