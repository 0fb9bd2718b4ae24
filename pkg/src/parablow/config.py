"""TOML surface descriptions.

::

    genus = 2
    deg_E = 0

    [[marked]]
    fiber = "p"
    weight = "1/3"
    on_sections = ["S"]

    [[section]]
    id = "S"
    self_int = 0
    contains = []

    [pairing]
    intersections = [["S", "T", 0]]

An optional ``[split]`` table with ``deg_plus`` and ``deg_minus`` declares
the bundle split and adds the sections ``"S+"`` and ``"S-"`` (disjoint).
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .continued_fractions import Weight
from .errors import ConfigError, InvalidWeight, ParablowError
from .surface import MarkedPoint, ParabolicSurface, SectionData


def _int(table, key, where):
    value = table.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: {key!r} must be an integer, got {value!r}")
    return value


def _str_list(value, where):
    if value is None:
        return []
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ConfigError(f"{where}: expected a list of strings, got {value!r}")
    return value


def surface_from_dict(data: dict) -> ParabolicSurface:
    genus = _int(data, "genus", "top level")
    marked = []
    for i, entry in enumerate(data.get("marked", [])):
        where = f"marked[{i}]"
        fiber = entry.get("fiber")
        if not isinstance(fiber, str):
            raise ConfigError(f"{where}: 'fiber' must be a string")
        try:
            weight = Weight.parse(entry.get("weight", ""))
        except InvalidWeight as exc:
            raise ConfigError(f"{where}: {exc}") from None
        marked.append(MarkedPoint(fiber, weight, _str_list(entry.get("on_sections"), where)))

    sections = []
    for i, entry in enumerate(data.get("section", [])):
        where = f"section[{i}]"
        sid = entry.get("id")
        if not isinstance(sid, str):
            raise ConfigError(f"{where}: 'id' must be a string")
        sections.append(SectionData(sid, _int(entry, "self_int", where),
                                    _str_list(entry.get("contains"), where)))

    pairings = {}
    for i, row in enumerate(data.get("pairing", {}).get("intersections", [])):
        if (not isinstance(row, list) or len(row) != 3 or not all(isinstance(x, str) for x in row[:2])
                or isinstance(row[2], bool) or not isinstance(row[2], int)):
            raise ConfigError(f"pairing.intersections[{i}] must be [id, id, int], got {row!r}")
        if row[0] == row[1]:
            raise ConfigError(f"pairing.intersections[{i}] pairs a section with itself")
        pairings[frozenset(row[:2])] = row[2]

    flags = dict(data.get("flags", {}))
    try:
        if "split" in data:
            split = data["split"]
            d_plus, d_minus = _int(split, "deg_plus", "split"), _int(split, "deg_minus", "split")
            if "deg_E" in data and data["deg_E"] != d_plus + d_minus:
                raise ConfigError("deg_E disagrees with split degrees")
            surface = ParabolicSurface.split(genus, d_plus, d_minus, marked, sections, pairings)
        else:
            surface = ParabolicSurface(genus, _int(data, "deg_E", "top level"), marked, sections,
                                       pairings)
    except ConfigError:
        raise
    except ParablowError as exc:
        raise ConfigError(str(exc)) from None
    surface.flags.update(flags)
    known = {s.id for s in surface.sections}
    for pair in pairings:
        bad = set(pair) - known
        if bad:
            raise ConfigError(f"pairing refers to unknown sections {sorted(bad)}")
    return surface


def load_surface(path) -> ParabolicSurface:
    try:
        with open(Path(path), "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return surface_from_dict(data)
