"""Intersection lattice of an iterated blowup of a split ruled surface.

Classes are written in the basis ``{C, F, E_1, E_2, ...}`` where ``C`` is
the hyperplane class of ``P(L_+ + L_-)``, ``F`` a fiber and ``E_i`` the
total transforms of the exceptional divisors.  The form is

    C.C = deg L_+ + deg L_-,   C.F = 1,   F.F = 0,
    E_i.E_j = -delta_ij,       C.E_i = F.E_i = 0.

Everything is exact; coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import functools

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .errors import (
    CenterNotOnSPlus,
    LatticeMismatch,
    NegativeDerivedArea,
    NonPositiveSquare,
)

if TYPE_CHECKING:
    from .blowup import FiberChain


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class H2Class:
    """An element of H^2 with rational coefficients.

    ``coeff_E`` is a sorted tuple of ``(blowup_id, coefficient)`` pairs with
    zero coefficients dropped, so equal classes compare equal.
    """

    coeff_C: Fraction = Fraction(0)
    coeff_F: Fraction = Fraction(0)
    coeff_E: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff_C", _frac(self.coeff_C))
        object.__setattr__(self, "coeff_F", _frac(self.coeff_F))
        items = dict(self.coeff_E) if not isinstance(self.coeff_E, Mapping) else self.coeff_E
        clean = tuple(sorted((k, _frac(v)) for k, v in items.items() if v != 0))
        object.__setattr__(self, "coeff_E", clean)

    @classmethod
    def hyperplane(cls) -> "H2Class":
        return cls(coeff_C=1)

    @classmethod
    def fiber(cls) -> "H2Class":
        return cls(coeff_F=1)

    @classmethod
    def exceptional(cls, blowup_id) -> "H2Class":
        return cls(coeff_E=((blowup_id, 1),))

    @property
    def e(self) -> dict:
        return dict(self.coeff_E)

    @functools.cached_property
    def _e_lookup(self) -> dict:
        return dict(self.coeff_E)

    def e_coeff(self, blowup_id) -> Fraction:
        return self._e_lookup.get(blowup_id, Fraction(0))

    def blowup_ids(self) -> set:
        return {k for k, _ in self.coeff_E}

    def __add__(self, other: "H2Class") -> "H2Class":
        if not isinstance(other, H2Class):
            return NotImplemented
        e = self.e
        for k, v in other.coeff_E:
            e[k] = e.get(k, 0) + v
        return H2Class(self.coeff_C + other.coeff_C, self.coeff_F + other.coeff_F, e)

    def __neg__(self) -> "H2Class":
        return H2Class(-self.coeff_C, -self.coeff_F, {k: -v for k, v in self.coeff_E})

    def __sub__(self, other: "H2Class") -> "H2Class":
        if not isinstance(other, H2Class):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "H2Class":
        s = _frac(scalar)
        return H2Class(s * self.coeff_C, s * self.coeff_F, {k: s * v for k, v in self.coeff_E})

    __rmul__ = __mul__

    def __str__(self):
        parts = []
        if self.coeff_C:
            parts.append(f"{self.coeff_C}*C")
        if self.coeff_F:
            parts.append(f"{self.coeff_F}*F")
        parts.extend(f"{v}*E{k}" for k, v in self.coeff_E)
        return " + ".join(parts) if parts else "0"


ZERO = H2Class()


def intersect(a: H2Class, b: H2Class, c_squared=0) -> Fraction:
    """Intersection number for a given value of ``C.C``.

    Classes supported on fibers never involve ``C``, so for them the
    default ``c_squared=0`` is exact.
    """
    val = (
        _frac(c_squared) * a.coeff_C * b.coeff_C
        + a.coeff_C * b.coeff_F
        + a.coeff_F * b.coeff_C
    )
    be = b._e_lookup
    for k, v in a.coeff_E:
        if k in be:
            val -= v * be[k]
    return val


@dataclass(frozen=True)
class SurfaceLattice:
    """Second cohomology lattice of a blowup of ``P(L_+ + L_-)`` over a genus-g curve."""

    genus: int
    deg_plus: int
    deg_minus: int
    blowup_ids: tuple = ()

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")
        object.__setattr__(self, "blowup_ids", tuple(self.blowup_ids))
        if len(set(self.blowup_ids)) != len(self.blowup_ids):
            raise ValueError("duplicate blowup ids")

    @classmethod
    def from_chains(cls, genus, deg_plus, deg_minus, chains: Iterable["FiberChain"]):
        ids = []
        for ch in chains:
            ids.extend(ch.blowup_ids)
        return cls(genus, deg_plus, deg_minus, tuple(ids))

    @property
    def c_squared(self) -> int:
        return self.deg_plus + self.deg_minus

    @property
    def rank(self) -> int:
        return 2 + len(self.blowup_ids)

    def check(self, a: H2Class) -> None:
        extra = a.blowup_ids() - set(self.blowup_ids)
        if extra:
            raise LatticeMismatch(f"class uses blowups {sorted(extra)} not in this lattice")

    def pair(self, a: H2Class, b: H2Class) -> Fraction:
        self.check(a)
        self.check(b)
        return intersect(a, b, self.c_squared)

    def square(self, a: H2Class) -> Fraction:
        return self.pair(a, a)

    def basis(self) -> list:
        return [H2Class.hyperplane(), H2Class.fiber()] + [
            H2Class.exceptional(i) for i in self.blowup_ids
        ]

    def gram(self) -> list:
        b = self.basis()
        return [[self.pair(x, y) for y in b] for x in b]


@dataclass(frozen=True)
class SectionClasses:
    s_plus: H2Class
    s_minus: H2Class
    s_hat_plus: H2Class
    s_hat_minus: H2Class


def section_classes(lattice: SurfaceLattice, chains: Sequence["FiberChain"] = ()) -> SectionClasses:
    """Classes of ``S_+-`` and of their proper transforms.

    ``S_+- = C - deg(L_+-) F``.  Every chain must have its first blowup on
    ``S_+``, so ``S^_+ = S_+ - sum of the first exceptional classes`` and
    ``S^_- = S_-``.
    """
    C, F = H2Class.hyperplane(), H2Class.fiber()
    s_plus = C - lattice.deg_plus * F
    s_minus = C - lattice.deg_minus * F
    s_hat_plus = s_plus
    for ch in chains:
        if not ch.center_on_plus:
            raise CenterNotOnSPlus(
                f"fiber {ch.fiber_id!r}: first blowup centre is on S_-; apply Cremona normalization first"
            )
        s_hat_plus = s_hat_plus - H2Class.exceptional(ch.blowup_ids[0])
    for cls in (s_plus, s_minus, s_hat_plus):
        lattice.check(cls)
    return SectionClasses(s_plus, s_minus, s_hat_plus, s_minus)


def canonical_first_chern(lattice: SurfaceLattice) -> H2Class:
    """First Chern class (anticanonical class) of the blown-up surface.

    ``c_1 = 2C - (deg E - chi) F - sum_i E_i`` with ``chi = 2 - 2g``.
    """
    chi = 2 - 2 * lattice.genus
    c1 = 2 * H2Class.hyperplane() - (lattice.c_squared - chi) * H2Class.fiber()
    for i in lattice.blowup_ids:
        c1 = c1 - H2Class.exceptional(i)
    return c1


def solve_exact_many(matrix: Sequence[Sequence[Fraction]], rhss: Sequence[Sequence[Fraction]]) -> list:
    """Gauss-Jordan elimination over the rationals for several right-hand sides.

    Returns one solution vector per right-hand side.
    """
    n, m = len(matrix), len(rhss)
    aug = [[_frac(x) for x in row] + [_frac(r[i]) for r in rhss] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        prow = [x * inv if x else x for x in aug[col]]
        aug[col] = prow
        nonzero = [j for j in range(col, n + m) if prow[j]]
        for r in range(n):
            f = aug[r][col]
            if r != col and f:
                row = aug[r]
                for j in nonzero:
                    row[j] -= f * prow[j]
    return [[aug[i][n + k] for i in range(n)] for k in range(m)]


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list:
    """Gauss-Jordan elimination over the rationals for a square system."""
    return solve_exact_many(matrix, [rhs])[0]


def kahler_from_areas(
    lattice: SurfaceLattice,
    chains: Sequence["FiberChain"],
    c_base,
    areas: Mapping = None,
    strict: bool = False,
) -> H2Class:
    """Class ``C + c_base F + sum b_i E_i`` with prescribed string areas.

    ``areas`` maps a fiber id to ``{label: area}`` for the curves of the two
    contracted strings (labels ``"E-1"``, ``"E+2"``, ...).  Missing entries
    are zero.  The central curve's area is not prescribed; it follows from
    ``Omega.F = 1``.  With ``strict=True`` a non-positive central area
    raises :class:`NegativeDerivedArea`.
    """
    return kahler_from_area_sets(lattice, chains, c_base, [areas or {}], strict)[0]


def kahler_from_area_sets(lattice, chains, c_base, area_sets, strict: bool = False) -> list:
    """:func:`kahler_from_areas` for several area prescriptions sharing one elimination."""
    c_base = _frac(c_base)
    base = H2Class.hyperplane() + c_base * H2Class.fiber()
    coeffs = [{} for _ in area_sets]
    for ch in chains:
        labels = {n.label for n in ch.string_nodes()}
        wanted = [areas.get(ch.fiber_id, {}) for areas in area_sets]
        for w in wanted:
            unknown = set(w) - labels
            if unknown:
                raise KeyError(f"fiber {ch.fiber_id!r}: no string curves {sorted(unknown)}")
        ids = list(ch.blowup_ids)
        nodes = ch.string_nodes()
        # Omega.E = base.E - sum_i b_i * coeff_i(E)
        mat = [[-n.cls.e_coeff(i) for i in ids] for n in nodes]
        base_part = [intersect(base, n.cls, lattice.c_squared) for n in nodes]
        rhss = [[_frac(w.get(n.label, 0)) - bp for n, bp in zip(nodes, base_part)] for w in wanted]
        for k, sol in enumerate(solve_exact_many(mat, rhss)):
            coeffs[k].update(zip(ids, sol))
    out = []
    for c in coeffs:
        omega = base + H2Class(coeff_E=c)
        lattice.check(omega)
        if strict:
            for ch in chains:
                a0 = lattice.pair(omega, ch.central.cls)
                if a0 <= 0:
                    raise NegativeDerivedArea(f"fiber {ch.fiber_id!r}: derived central area {a0} <= 0")
        out.append(omega)
    return out


def volume(lattice: SurfaceLattice, omega: H2Class) -> Fraction:
    sq = lattice.square(omega)
    if sq <= 0:
        raise NonPositiveSquare(f"Omega^2 = {sq} is not positive")
    return sq / 2


def mean_scalar(lattice: SurfaceLattice, omega: H2Class) -> Fraction:
    """``r`` with average scalar curvature ``8*pi*r``; ``r = c_1.Omega / Omega^2``."""
    sq = lattice.square(omega)
    if sq <= 0:
        raise NonPositiveSquare(f"Omega^2 = {sq} is not positive")
    return lattice.pair(canonical_first_chern(lattice), omega) / sq


def orbifold_euler_characteristic(genus: int, orders: Iterable[int]) -> Fraction:
    """``2 - 2g + sum (1/q_j - 1)`` over the orbifold points."""
    return 2 - 2 * genus + sum((Fraction(1, q) - 1 for q in orders), Fraction(0))


def orbifold_mean_scalar(par_deg_E, chi_orb, c) -> Fraction:
    """Mean-scalar ratio ``r_C`` for the orbifold class ``c_1(O(1)) + C F``."""
    par_deg_E, chi_orb, c = _frac(par_deg_E), _frac(chi_orb), _frac(c)
    den = par_deg_E + 2 * c
    if den <= 0:
        raise NonPositiveSquare(f"orbifold square {den} is not positive")
    return (par_deg_E + chi_orb + 2 * c) / den


@dataclass
class KahlerCheck:
    """Necessary positivity conditions; membership in the Kahler cone is not decided."""

    entries: list = field(default_factory=list)

    def add(self, name, value):
        self.entries.append((name, value, value > 0))

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.entries)

    def failures(self) -> list:
        return [name for name, _, ok in self.entries if not ok]

    def as_dict(self) -> dict:
        from .continued_fractions import format_fraction

        return {
            "passed": self.passed,
            "checks": [
                {"name": n, "value": format_fraction(v), "ok": ok} for n, v, ok in self.entries
            ],
        }


def kahler_necessary_check(
    lattice: SurfaceLattice, chains: Sequence["FiberChain"], omega: H2Class
) -> KahlerCheck:
    report = KahlerCheck()
    report.add("Omega^2", lattice.square(omega))
    report.add("Omega.F", lattice.pair(omega, H2Class.fiber()))
    for ch in chains:
        for node in ch.nodes:
            report.add(f"Omega.{node.label}[{ch.fiber_id}]", lattice.pair(omega, node.cls))
    if all(ch.center_on_plus for ch in chains):
        sc = section_classes(lattice, chains)
        report.add("Omega.S^+", lattice.pair(omega, sc.s_hat_plus))
        report.add("Omega.S^-", lattice.pair(omega, sc.s_hat_minus))
    return report
