"""Parabolic ruled surfaces: slopes, stability verdicts, central fibers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

from .blowup import CremonaData, cremona
from .continued_fractions import Weight, as_weight
from .errors import ConfigError, ParityViolation, UnknownSection


@dataclass(frozen=True)
class MarkedPoint:
    fiber_id: str
    weight: Weight
    incidence: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "weight", as_weight(self.weight))
        object.__setattr__(self, "incidence", frozenset(self.incidence))


@dataclass(frozen=True)
class SectionData:
    id: str
    self_int: int
    contains: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "contains", frozenset(self.contains))


@dataclass(frozen=True)
class ParabolicSurface:
    """A geometrically ruled surface with marked points and candidate sections.

    ``pairings`` maps ``frozenset({id1, id2})`` to the intersection number of
    two distinct sections.  A point lies on a section when either the point's
    ``incidence`` or the section's ``contains`` says so.
    """

    genus: int
    deg_E: int
    marked: tuple = ()
    sections: tuple = ()
    pairings: dict = field(default_factory=dict, hash=False, compare=False)
    flags: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "marked", tuple(self.marked))
        object.__setattr__(self, "sections", tuple(self.sections))
        if self.genus < 0:
            raise ConfigError("genus must be nonnegative")
        fibers = [m.fiber_id for m in self.marked]
        if len(set(fibers)) != len(fibers):
            raise ConfigError("marked points must lie in distinct fibers")
        ids = [s.id for s in self.sections]
        if len(set(ids)) != len(ids):
            raise ConfigError("section ids must be unique")
        known = set(ids)
        for m in self.marked:
            bad = m.incidence - known
            if bad:
                raise ConfigError(f"point {m.fiber_id!r} refers to unknown sections {sorted(bad)}")
        for s in self.sections:
            bad = s.contains - set(fibers)
            if bad:
                raise ConfigError(f"section {s.id!r} contains unknown fibers {sorted(bad)}")
            if (s.self_int - self.deg_E) % 2:
                raise ParityViolation(
                    f"section {s.id!r}: S^2 = {s.self_int} and deg E = {self.deg_E} differ in parity"
                )

    @classmethod
    def split(cls, genus: int, deg_plus: int, deg_minus: int, marked: Iterable[MarkedPoint] = (),
              extra_sections: Iterable[SectionData] = (), pairings: Optional[dict] = None):
        """``P(L_+ + L_-)`` with its two sections ``"S+"`` and ``"S-"`` included."""
        pairs = dict(pairings or {})
        pairs[frozenset(("S+", "S-"))] = 0
        sections = (
            SectionData("S+", deg_minus - deg_plus),
            SectionData("S-", deg_plus - deg_minus),
        ) + tuple(extra_sections)
        return cls(genus, deg_plus + deg_minus, tuple(marked), sections, pairs)

    def section(self, section_id) -> SectionData:
        for s in self.sections:
            if s.id == section_id:
                return s
        raise UnknownSection(section_id)

    def on_section(self, point: MarkedPoint, section: SectionData) -> bool:
        return section.id in point.incidence or point.fiber_id in section.contains

    def intersection(self, a, b) -> Optional[int]:
        return self.pairings.get(frozenset((a, b)))


def par_slope(surface: ParabolicSurface, section_id) -> Fraction:
    """``S^2 + sum of weights off S - sum of weights on S``."""
    s = surface.section(section_id)
    total = Fraction(s.self_int)
    for m in surface.marked:
        total += -m.weight.value if surface.on_section(m, s) else m.weight.value
    return total


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`classify_stability`.

    ``kind`` is one of ``unstable``, ``polystable``, ``stable_relative`` or
    ``indeterminate``.  Stability is only ever claimed relative to the
    supplied sections.
    """

    kind: str
    slopes: dict
    witness: Optional[str] = None
    pair: Optional[tuple] = None
    reason: str = ""

    UNSTABLE = "unstable"
    POLYSTABLE = "polystable"
    STABLE_RELATIVE = "stable_relative"
    INDETERMINATE = "indeterminate"


def classify_stability(surface: ParabolicSurface) -> Verdict:
    slopes = {s.id: par_slope(surface, s.id) for s in surface.sections}
    if not slopes:
        return Verdict(Verdict.INDETERMINATE, slopes, reason="no candidate sections supplied")
    negative = [sid for sid, mu in slopes.items() if mu < 0]
    if negative:
        worst = min(negative, key=lambda sid: (slopes[sid], sid))
        return Verdict(Verdict.UNSTABLE, slopes, witness=worst, reason="negative parabolic slope")
    zero = [sid for sid, mu in slopes.items() if mu == 0]
    if zero:
        for i, a in enumerate(zero):
            for b in zero[i + 1:]:
                if surface.intersection(a, b) == 0:
                    return Verdict(Verdict.POLYSTABLE, slopes, pair=(a, b),
                                   reason="two disjoint sections of slope zero")
        lonely = [sid for sid in zero if not any(
            surface.intersection(sid, other) == 0 for other in zero if other != sid)]
        return Verdict(Verdict.UNSTABLE, slopes, witness=lonely[0],
                       reason="slope zero without a disjoint slope-zero partner")
    return Verdict(Verdict.STABLE_RELATIVE, slopes,
                   reason="all supplied sections have positive slope")


@dataclass(frozen=True)
class ModelPoint:
    fiber_id: str
    weight: Weight
    on_plus: bool


@dataclass(frozen=True)
class CremonaStep:
    fiber_id: str
    weight_before: Weight
    weight_after: Weight


@dataclass(frozen=True)
class CentralFiberModel:
    """``P(L_+ + L_-)`` with marked points placed on ``S_+`` or ``S_-``."""

    genus: int
    deg_plus: int
    deg_minus: int
    points: tuple = ()

    @property
    def deg_E(self) -> int:
        return self.deg_plus + self.deg_minus

    @property
    def s_plus_sq(self) -> int:
        return self.deg_minus - self.deg_plus

    @property
    def s_minus_sq(self) -> int:
        return self.deg_plus - self.deg_minus

    @property
    def slope_plus(self) -> Fraction:
        total = Fraction(self.s_plus_sq)
        for pt in self.points:
            total += -pt.weight.value if pt.on_plus else pt.weight.value
        return total

    @property
    def slope_minus(self) -> Fraction:
        total = Fraction(self.s_minus_sq)
        for pt in self.points:
            total += pt.weight.value if pt.on_plus else -pt.weight.value
        return total

    @property
    def is_normalized(self) -> bool:
        return all(pt.on_plus for pt in self.points)

    def as_surface(self) -> ParabolicSurface:
        marked = [MarkedPoint(pt.fiber_id, pt.weight, {"S+" if pt.on_plus else "S-"})
                  for pt in self.points]
        return ParabolicSurface.split(self.genus, self.deg_plus, self.deg_minus, marked)


def central_fiber(surface: ParabolicSurface, section_id) -> CentralFiberModel:
    """Split degeneration towards the line subbundle of the section ``S``.

    ``deg L_+ = (deg E - S^2)/2``; points on ``S`` go to ``S_+``, the rest to
    ``S_-``.
    """
    s = surface.section(section_id)
    if (surface.deg_E - s.self_int) % 2:
        raise ParityViolation(f"deg E = {surface.deg_E} and S^2 = {s.self_int} differ in parity")
    points = tuple(
        ModelPoint(m.fiber_id, m.weight, surface.on_section(m, s)) for m in surface.marked
    )
    return CentralFiberModel(
        genus=surface.genus,
        deg_plus=(surface.deg_E - s.self_int) // 2,
        deg_minus=(surface.deg_E + s.self_int) // 2,
        points=points,
    )


def normalize_to_splus(model: CentralFiberModel) -> tuple[CentralFiberModel, list]:
    """Move every marked point onto ``S_+`` by Cremona transformations.

    Each step raises ``S_+^2`` by one and lowers ``S_-^2`` by one; this is
    recorded as ``deg L_-`` increasing by one.
    """
    steps = []
    deg_minus = model.deg_minus
    points = []
    for pt in model.points:
        if pt.on_plus:
            points.append(pt)
            continue
        local = CremonaData(pt.weight, True, model.deg_plus - deg_minus, deg_minus - model.deg_plus)
        moved = cremona(local)
        deg_minus += 1
        steps.append(CremonaStep(pt.fiber_id, pt.weight, moved.weight))
        points.append(ModelPoint(pt.fiber_id, moved.weight, True))
    return replace(model, deg_minus=deg_minus, points=tuple(points)), steps
