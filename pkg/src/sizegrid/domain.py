"""Core vocabulary: seasons, size tokens, grid names, grids, planning groups.

Season codes are 3-digit integers: tens/hundreds give the year suffix, the
last digit gives the half (1 = spring/summer, 3 = fall/winter).  191 is
spring/summer 2019 and sorts before 193, fall/winter of the same year.
Everything here is an immutable value; downstream stages share these objects
freely.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .errors import (
    EmptyAfterNormalize,
    InvalidConfig,
    MalformedGridName,
    MalformedSeason,
)

log = logging.getLogger(__name__)

SPRING_SUMMER = 1
FALL_WINTER = 3
HALVES = (SPRING_SUMMER, FALL_WINTER)

GENDERS = ("M", "W")
CATEGORIES = ("T", "B")
# Extensions seen in grid names so far. The set is open: new suffixes are
# accepted with a warning so an unexpected catalog does not stop a run.
KNOWN_EXTENSIONS = ("L", "M", "H", "Y", "B&T")

_SEPARATORS = re.compile(r"[\s:,\-]+")


@dataclass(frozen=True, order=True)
class SeasonCode:
    """One selling season. Ordering is chronological."""

    year_suffix: int
    half: int

    def __post_init__(self):
        if not 0 <= self.year_suffix <= 99:
            raise MalformedSeason(f"year suffix out of range: {self.year_suffix}")
        if self.half not in HALVES:
            raise MalformedSeason(f"half must be one of {HALVES}: {self.half}")

    @property
    def code(self) -> int:
        return self.year_suffix * 10 + self.half

    def previous(self) -> "SeasonCode":
        if self.half == FALL_WINTER:
            return SeasonCode(self.year_suffix, SPRING_SUMMER)
        return SeasonCode(self.year_suffix - 1, FALL_WINTER)

    def next(self) -> "SeasonCode":
        if self.half == SPRING_SUMMER:
            return SeasonCode(self.year_suffix, FALL_WINTER)
        return SeasonCode(self.year_suffix + 1, SPRING_SUMMER)

    def __str__(self) -> str:
        return str(self.code)


def parse_season(code: int) -> SeasonCode:
    """Parse a 3-digit season code; rejects anything else with MalformedSeason."""
    if not isinstance(code, int) or isinstance(code, bool):
        raise MalformedSeason(f"season code must be an integer: {code!r}")
    if not 100 <= code <= 999:
        raise MalformedSeason(f"season code must have 3 digits: {code}")
    half = code % 10
    if half not in HALVES:
        raise MalformedSeason(f"season code must end in 1 or 3: {code}")
    return SeasonCode(code // 10, half)


def previous_seasons(season: SeasonCode, n: int) -> list[SeasonCode]:
    """The n seasons before `season`, most recent first.

    Codes below any particular corpus floor are still well formed; callers
    filter against the seasons they actually have.
    """
    out = []
    cur = season
    for _ in range(n):
        cur = cur.previous()
        out.append(cur)
    return out


def normalize_size_token(raw: str) -> str:
    """Strip separators and blanks from a size token: '32: 30' -> '3230'.

    Case is preserved. A token that is nothing but separators raises
    EmptyAfterNormalize.
    """
    out = _SEPARATORS.sub("", raw)
    if not out:
        raise EmptyAfterNormalize(f"size token empty after normalization: {raw!r}")
    return out


@dataclass(frozen=True)
class SizeGridName:
    """Decomposed grid name, e.g. 'WB-Youth Super Skinny-M'."""

    raw: str
    gender: str
    category: str
    descriptive: str
    extension: str

    def render(self) -> str:
        return f"{self.gender}{self.category}-{self.descriptive}-{self.extension}"


def parse_grid_name(raw: str) -> SizeGridName:
    """Split a grid name into gender, category, descriptive part and extension.

    The first and last dash-delimited tokens are prefix and suffix; whatever
    sits between is the descriptive part and may itself contain dashes.
    Gender and category come from closed sets; the extension set is open and
    unknown suffixes only log a warning.
    """
    if not raw or not raw.strip():
        raise MalformedGridName("grid name is empty")
    text = raw.replace("–", "-").strip()
    tokens = text.split("-")
    if len(tokens) < 3:
        raise MalformedGridName(f"expected prefix-descriptive-extension: {raw!r}")
    prefix = tokens[0].strip()
    extension = tokens[-1].strip()
    descriptive = "-".join(tokens[1:-1]).strip()
    if len(prefix) != 2:
        raise MalformedGridName(f"prefix must be two letters: {raw!r}")
    gender, category = prefix[0], prefix[1]
    if gender not in GENDERS:
        raise MalformedGridName(f"unknown gender {gender!r} in {raw!r}")
    if category not in CATEGORIES:
        raise MalformedGridName(f"unknown category {category!r} in {raw!r}")
    if not descriptive:
        raise MalformedGridName(f"descriptive part is empty: {raw!r}")
    if not extension:
        raise MalformedGridName(f"extension is empty: {raw!r}")
    if extension not in KNOWN_EXTENSIONS:
        log.warning("unknown grid-name extension %r in %r", extension, raw)
    name = SizeGridName(
        raw=f"{gender}{category}-{descriptive}-{extension}",
        gender=gender,
        category=category,
        descriptive=descriptive,
        extension=extension,
    )
    return name


@dataclass(frozen=True)
class SizeCell:
    """One size position inside a grid. i indexes dim1, j indexes dim2.

    Indices are positions in the grid's ordered value lists, never the
    numeric size itself: waist 27 sits at i=1 when the waist list starts
    at 26.
    """

    dim1: str
    dim2: str | None
    i: int
    j: int

    @property
    def token(self) -> str:
        """Normalized size token for joining against KPI tables."""
        if self.dim2 is None:
            return normalize_size_token(self.dim1)
        return normalize_size_token(self.dim1 + self.dim2)


@dataclass(frozen=True)
class SizeGrid:
    """Cartesian grid of dim1 x dim2 values. dim2 may be empty (1-D grid)."""

    name: SizeGridName
    dim1_values: tuple[str, ...]
    dim2_values: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.dim1_values:
            raise MalformedGridName(f"grid {self.name.raw!r} has no dim1 values")
        if len(set(self.dim1_values)) != len(self.dim1_values):
            raise MalformedGridName(f"duplicate dim1 values in {self.name.raw!r}")
        if self.dim2_values and len(set(self.dim2_values)) != len(self.dim2_values):
            raise MalformedGridName(f"duplicate dim2 values in {self.name.raw!r}")
        tokens = [c.token for c in self.cells()]
        if len(set(tokens)) != len(tokens):
            raise MalformedGridName(f"size tokens collide in {self.name.raw!r}")

    @property
    def width(self) -> int:
        return len(self.dim1_values)

    @property
    def height(self) -> int:
        return max(1, len(self.dim2_values))

    @property
    def one_dimensional(self) -> bool:
        return not self.dim2_values

    def cells(self) -> list[SizeCell]:
        """All cells in row-major order (j outer, i inner)."""
        if self.one_dimensional:
            return [SizeCell(v, None, i, 0) for i, v in enumerate(self.dim1_values)]
        return [
            SizeCell(v1, v2, i, j)
            for j, v2 in enumerate(self.dim2_values)
            for i, v1 in enumerate(self.dim1_values)
        ]

    def cell_at(self, i: int, j: int) -> SizeCell | None:
        if not 0 <= i < self.width or not 0 <= j < self.height:
            return None
        dim2 = None if self.one_dimensional else self.dim2_values[j]
        return SizeCell(self.dim1_values[i], dim2, i, j)

    def cells_by_token(self) -> dict[str, SizeCell]:
        return {c.token: c for c in self.cells()}


CHANNELS = ("Retail", "Wholesale")


@dataclass(frozen=True)
class PlanningGroup:
    """A distribution unit: name plus sales channel plus affiliate."""

    name: str
    channel: str
    affiliate: str

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise InvalidConfig(f"unknown channel {self.channel!r}")
