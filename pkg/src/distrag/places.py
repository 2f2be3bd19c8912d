"""Optional remote place extraction with mandatory on-disk caching.

Talks to an Overpass-style endpoint (``POST {base}/interpreter`` with the
query in the ``data`` form field, JSON ``elements`` in the reply).  Every
successful fetch is written to a content-addressed CSV in the cache
directory; later calls for the same region are served from disk.
"""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path

import requests

from distrag.errors import EmptyResult, NetworkError, RateLimited
from distrag.geo import City, GeoPoint, Gazetteer, canonical_key, city_display_name
from distrag.geo import load_gazetteer, write_gazetteer

log = logging.getLogger(__name__)

DEFAULT_PLACES_URL = "https://overpass-api.de/api"
PLACE_KINDS = ("city", "town")
REGION_TAGS = ("is_in:state_code", "addr:state", "is_in:state", "state_code")


def default_base_url() -> str:
    return os.environ.get("DISTRAG_PLACES_URL", DEFAULT_PLACES_URL)


class PlaceClient:
    def __init__(self, base_url=None, timeout=60.0, cache_dir=".distrag-cache", session=None):
        self.base_url = (base_url or default_base_url()).rstrip("/")
        self.timeout = timeout
        self.cache_dir = Path(cache_dir)
        self.session = session or requests.Session()

    def build_query(self, region: str) -> str:
        kinds = "|".join(PLACE_KINDS)
        return (
            "[out:json][timeout:120];\n"
            f'area["name"="{region}"]["boundary"="administrative"]->.searchArea;\n'
            f'node["place"~"^({kinds})$"]["name"](area.searchArea);\n'
            "out body;\n"
        )

    def cache_path(self, region: str) -> Path:
        digest = hashlib.sha256(
            f"{self.base_url}\n{self.build_query(region)}".encode("utf-8")
        ).hexdigest()[:16]
        return self.cache_dir / f"places-{digest}.csv"

    def fetch_elements(self, region: str) -> list:
        try:
            resp = self.session.post(
                f"{self.base_url}/interpreter",
                data={"data": self.build_query(region)},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise NetworkError(f"place service unreachable: {exc}") from exc
        if resp.status_code == 429:
            retry_after = resp.headers.get("Retry-After")
            try:
                retry_after = float(retry_after) if retry_after is not None else None
            except ValueError:
                retry_after = None
            raise RateLimited(retry_after)
        if resp.status_code != 200:
            raise NetworkError(f"place service returned HTTP {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise NetworkError("place service returned a non-JSON body") from exc
        if not isinstance(body, dict) or not isinstance(body.get("elements"), list):
            raise NetworkError("place service response lacks an 'elements' list")
        return body["elements"]


def _element_to_city(element: dict, default_region: str):
    tags = element.get("tags") or {}
    name = (tags.get("name:en") or tags.get("name") or "").strip()
    if not name or "lat" not in element or "lon" not in element:
        return None
    region = next((tags[t] for t in REGION_TAGS if tags.get(t)), default_region)
    try:
        point = GeoPoint(float(element["lat"]), float(element["lon"]))
    except (TypeError, ValueError):
        return None
    population = tags.get("population", "").replace(",", "").strip()
    pop = int(population) if population.isdigit() else None
    return City(city_display_name(name, region), point, pop)


def fetch_places_remote(region: str, client: PlaceClient) -> Gazetteer:
    """Fetch populated places in ``region``, caching the result as CSV."""
    cache = client.cache_path(region)
    if cache.is_file():
        log.debug("serving %s from cache %s", region, cache)
        return load_gazetteer(cache)

    elements = client.fetch_elements(region)
    best: dict[str, City] = {}
    order: list[str] = []
    for element in elements:
        if element.get("type", "node") != "node":
            continue
        city = _element_to_city(element, region)
        if city is None:
            continue
        key = canonical_key(city.name)
        if key not in best:
            order.append(key)
            best[key] = city
        elif (city.population or 0) > (best[key].population or 0):
            # homonyms within one region: keep the most populous
            best[key] = city
    if not best:
        raise EmptyResult(f"no populated places found for region {region!r}")

    gazetteer = Gazetteer(best[k] for k in order)
    client.cache_dir.mkdir(parents=True, exist_ok=True)
    write_gazetteer(gazetteer, cache)
    return gazetteer
