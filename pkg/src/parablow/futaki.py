"""Futaki and Donaldson-Futaki invariants of the split central fiber.

All quantities are exact rationals.  The moment map is rescaled as
``t~ = 4*pi*t`` so that it ranges over ``[-1, 1]`` when ``Omega.F = 1``;
with this normalization every power of pi cancels:

* ``integral t dmu   = r_t / pi``
* ``integral s t dmu = integral_st``
* ``s_bar            = 8 * pi * r``
* ``Futaki           = 8 r r_t - integral_st``

A profile ``t~`` lists the critical values at the saddle points of one
fiber's string, left to right (``k + l`` values for ``k + l + 1`` curves).
"""

from __future__ import annotations

import functools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .blowup import FiberChain, build_chain, id_allocator
from .continued_fractions import format_fraction
from .errors import (
    IndeterminateSign,
    NonPositiveSquare,
    NotDestabilizing,
    OutOfRange,
    SearchExhausted,
)
from .lattice import (
    H2Class,
    KahlerCheck,
    SurfaceLattice,
    canonical_first_chern,
    kahler_from_area_sets,
    kahler_necessary_check,
    section_classes,
)
from .surface import (
    CentralFiberModel,
    ParabolicSurface,
    central_fiber,
    normalize_to_splus,
    par_slope,
)

ONE = Fraction(1)


@dataclass(frozen=True)
class FutakiInput:
    """Data entering the closed-form Futaki integrals.

    ``weights[f]`` are the flattened C*-weights ``w_1..w_{k+l+1}`` of fiber
    ``f``; ``profiles[f]`` its normalized saddle values ``t~_1..t~_{k+l}``.
    ``separation`` is ``Omega.(S^_+ - S^_-)`` as it enters the integrals and
    ``mean_scalar`` is ``r = s_bar / (8 pi)``.
    """

    weights: tuple
    profiles: tuple
    s_hat_minus_sq: Fraction
    s_hat_plus_sq: Fraction
    separation: Fraction
    mean_scalar: Fraction
    omega_sq: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.weights) != len(self.profiles):
            raise ValueError("one profile per fiber is required")
        for w, t in zip(self.weights, self.profiles):
            if len(t) != len(w) - 1:
                raise ValueError(f"profile of length {len(t)} does not match {len(w)} curves")
            if any(x < -1 or x > 1 for x in t):
                raise OutOfRange("profile values must lie in [-1, 1]")
            if any(a > b for a, b in zip(t, t[1:])):
                raise ValueError("profile must be nondecreasing")


def integral_t(inp: FutakiInput) -> Fraction:
    """``r_t`` with ``integral t dmu = r_t / pi``."""
    cubic = Fraction(0)
    for w, t in zip(inp.weights, inp.profiles):
        for j, tj in enumerate(t):
            cubic += tj ** 3 / (w[j] * w[j + 1])
    return (inp.s_hat_minus_sq - inp.s_hat_plus_sq + 6 * inp.separation - cubic) / 96


def saddle_correction(inp: FutakiInput) -> Fraction:
    """Orbifold correction to ``integral s t dmu``.

    Between consecutive critical values the reduced space has an orbifold
    point whose order is the weight of the curve spanning that interval;
    each interval contributes ``(1/w - 1)(t~_hi^2 - t~_lo^2) / 4``.
    """
    total = Fraction(0)
    for w, t in zip(inp.weights, inp.profiles):
        levels = (-ONE,) + tuple(t) + (ONE,)
        for j, wj in enumerate(w):
            if wj != 1:
                total += (Fraction(1, wj) - 1) * (levels[j + 1] ** 2 - levels[j] ** 2)
    return total / 4


def integral_st(inp: FutakiInput, saddle: bool = True) -> Fraction:
    value = inp.separation
    if saddle:
        value += saddle_correction(inp)
    return value


def futaki(inp: FutakiInput, saddle: bool = True) -> Fraction:
    """``integral (s_bar - s) t dmu``.

    ``saddle=False`` drops :func:`saddle_correction`, which is the form used
    along the two-parameter family in :func:`Degeneration.futaki_futs2`.
    """
    return 8 * inp.mean_scalar * integral_t(inp) - integral_st(inp, saddle)


def futaki_limit(r_orb, slope) -> Fraction:
    """Limit of the Futaki invariant at the orbifold class: ``(1 - 2 r/3) * slope``."""
    return (1 - Fraction(2, 3) * Fraction(r_orb)) * Fraction(slope)


def donaldson_futaki(futaki_value, omega, lattice: Optional[SurfaceLattice] = None) -> Fraction:
    """``F_1 = Futaki / (4 vol)`` with ``vol = Omega^2 / 2``.

    ``omega`` is either the class (then ``lattice`` is required) or ``Omega^2``.
    """
    if isinstance(omega, H2Class):
        if lattice is None:
            raise ValueError("a lattice is needed to square a class")
        omega_sq = lattice.square(omega)
    else:
        omega_sq = Fraction(omega)
    if omega_sq <= 0:
        raise NonPositiveSquare(f"Omega^2 = {omega_sq} is not positive")
    return Fraction(futaki_value) / (2 * omega_sq)


def degenerate_profile(chain: FiberChain) -> tuple:
    """Saddle values of the orbifold limit: ``-1`` left of ``E_0``, ``+1`` right of it."""
    return tuple(-ONE if i < chain.k else ONE for i in range(len(chain.nodes) - 1))


def profile_from_areas(chain: FiberChain, areas: dict) -> tuple:
    """Saddle values from string areas, accumulating ``w * area`` from each end.

    With area ``tau-`` on ``E-_1``, ``tau+`` on ``E+_1`` and zero elsewhere this
    gives ``t~ = tau- - 1`` left of ``E_0`` and ``1 - tau+`` right of it.
    """
    nodes = chain.nodes
    k = chain.k
    out = []
    acc = -ONE
    for i in range(k):
        acc += nodes[i].w * Fraction(areas.get(nodes[i].label, 0))
        out.append(acc)
    right = []
    acc = ONE
    for i in range(len(nodes) - 1, k, -1):
        acc -= nodes[i].w * Fraction(areas.get(nodes[i].label, 0))
        right.append(acc)
    return tuple(out) + tuple(reversed(right))


def futs2_areas(chain: FiberChain, tau_minus, tau_plus, inner=0) -> dict:
    """Area dictionary of the family: ``tau+-`` on ``E+-_1``, ``inner`` on the other string curves."""
    areas = {}
    for n in chain.string_nodes():
        if n.label == "E-1":
            areas[n.label] = Fraction(tau_minus)
        elif n.label == "E+1":
            areas[n.label] = Fraction(tau_plus)
        else:
            areas[n.label] = Fraction(inner)
    return areas


class Degeneration:
    """Normalized central fiber realized as an iterated blowup.

    The Kahler classes of the family are affine in
    ``(c_base, tau-, tau+, inner)``, so the Gram data is computed once and
    every evaluation afterwards is a handful of rational operations.
    """

    def __init__(self, model: CentralFiberModel):
        if not model.is_normalized:
            model, _ = normalize_to_splus(model)
        self.model = model
        alloc = id_allocator()
        self.chains = tuple(
            build_chain(pt.weight, alloc=alloc, fiber_id=pt.fiber_id)[0] for pt in model.points
        )
        self.lattice = SurfaceLattice.from_chains(
            model.genus, model.deg_plus, model.deg_minus, self.chains
        )
        self.sections = section_classes(self.lattice, self.chains)
        self.c1 = canonical_first_chern(self.lattice)
        sep_class = self.sections.s_hat_plus - self.sections.s_hat_minus

        def areas(tm, tp, inner):
            return {ch.fiber_id: futs2_areas(ch, tm, tp, inner) for ch in self.chains}

        origin, dm, dp, di = kahler_from_area_sets(
            self.lattice, self.chains, 0,
            [areas(0, 0, 0), areas(1, 0, 0), areas(0, 1, 0), areas(0, 0, 1)],
        )
        self._basis = (origin, H2Class.fiber(), dm - origin, dp - origin, di - origin)
        pair = self.lattice.pair
        self._gram = [[pair(a, b) for b in self._basis] for a in self._basis]
        self._c1 = [pair(self.c1, a) for a in self._basis]
        self._sep = [pair(sep_class, a) for a in self._basis]
        self.s_hat_plus_sq = self.lattice.square(self.sections.s_hat_plus)
        self.s_hat_minus_sq = self.lattice.square(self.sections.s_hat_minus)
        self.weights = tuple(tuple(ch.w) for ch in self.chains)
        # the lattice separation at the orbifold class is the slope of S_+
        assert self._sep[0] == model.slope_plus, (self._sep[0], model.slope_plus)

    @property
    def slope_plus(self) -> Fraction:
        return self.model.slope_plus

    @property
    def multi_point(self) -> bool:
        return len(self.chains) > 1

    def _coords(self, c_base, tau_minus, tau_plus, inner):
        return (ONE, Fraction(c_base), Fraction(tau_minus), Fraction(tau_plus), Fraction(inner))

    def kahler_class(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> H2Class:
        x = self._coords(c_base, tau_minus, tau_plus, inner)
        omega = H2Class()
        for xi, b in zip(x, self._basis):
            if xi:
                omega = omega + xi * b
        return omega

    def omega_sq(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> Fraction:
        x = self._coords(c_base, tau_minus, tau_plus, inner)
        g = self._gram
        return sum((x[i] * x[j] * g[i][j] for i in range(5) for j in range(5) if x[i] and x[j]),
                   Fraction(0))

    def mean_scalar(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> Fraction:
        x = self._coords(c_base, tau_minus, tau_plus, inner)
        sq = self.omega_sq(c_base, tau_minus, tau_plus, inner)
        if sq <= 0:
            raise NonPositiveSquare(f"Omega^2 = {sq} is not positive")
        return sum((a * b for a, b in zip(self._c1, x)), Fraction(0)) / sq

    def lattice_separation(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> Fraction:
        """``Omega.(S^_+ - S^_-)`` computed in the lattice."""
        x = self._coords(c_base, tau_minus, tau_plus, inner)
        return sum((a * b for a, b in zip(self._sep, x)), Fraction(0))

    def separation(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> Fraction:
        """Separation term of the Futaki integrals.

        Its value at the orbifold class is ``parmu(S_-) = -parmu(S_+)``; the
        dependence on the string areas is the lattice one.
        """
        variation = self.lattice_separation(c_base, tau_minus, tau_plus, inner) - self._sep[0]
        return self.model.slope_minus + variation

    def profiles(self, tau_minus, tau_plus, inner=0) -> tuple:
        return tuple(
            profile_from_areas(ch, futs2_areas(ch, tau_minus, tau_plus, inner)) for ch in self.chains
        )

    def futs2_input(self, c_base, tau_minus, tau_plus, inner=0) -> FutakiInput:
        return FutakiInput(
            weights=self.weights,
            profiles=self.profiles(tau_minus, tau_plus, inner),
            s_hat_minus_sq=self.s_hat_minus_sq,
            s_hat_plus_sq=self.s_hat_plus_sq,
            separation=self.separation(c_base, tau_minus, tau_plus, inner),
            mean_scalar=self.mean_scalar(c_base, tau_minus, tau_plus, inner),
            omega_sq=self.omega_sq(c_base, tau_minus, tau_plus, inner),
        )

    def degenerate_input(self, c_base) -> FutakiInput:
        return FutakiInput(
            weights=self.weights,
            profiles=tuple(degenerate_profile(ch) for ch in self.chains),
            s_hat_minus_sq=self.s_hat_minus_sq,
            s_hat_plus_sq=self.s_hat_plus_sq,
            separation=self.separation(c_base),
            mean_scalar=self.mean_scalar(c_base),
            omega_sq=self.omega_sq(c_base),
        )

    def _futs2(self, c_base, tau_minus, tau_plus, inner=0) -> Fraction:
        return futaki(self.futs2_input(c_base, tau_minus, tau_plus, inner), saddle=False)

    def futaki_futs2(self, c_base, tau_minus, tau_plus, inner=0) -> Fraction:
        """Futaki invariant along the two-parameter family ``Omega.E+-_1 = tau+-``."""
        for name, tau in (("tau-", tau_minus), ("tau+", tau_plus)):
            if not 0 < Fraction(tau) < 1:
                raise OutOfRange(f"{name} = {tau} is not in (0, 1)")
        if Fraction(inner) < 0:
            raise OutOfRange("inner area must be nonnegative")
        return self._futs2(c_base, tau_minus, tau_plus, inner)

    def limit_value(self, c_base) -> Fraction:
        return futaki_limit(self.mean_scalar(c_base), self.slope_plus)

    def kahler_check(self, c_base, tau_minus=0, tau_plus=0, inner=0) -> KahlerCheck:
        omega = self.kahler_class(c_base, tau_minus, tau_plus, inner)
        return kahler_necessary_check(self.lattice, self.chains, omega)


def as_degeneration(obj) -> Degeneration:
    if isinstance(obj, Degeneration):
        return obj
    if isinstance(obj, CentralFiberModel):
        return Degeneration(obj)
    raise TypeError(f"expected a Degeneration or CentralFiberModel, got {type(obj).__name__}")


def futaki_futs2(model, c_base, tau_minus, tau_plus, inner=0) -> Fraction:
    return as_degeneration(model).futaki_futs2(c_base, tau_minus, tau_plus, inner)


def gradient(model, c_base, h) -> tuple[Fraction, Fraction]:
    """One-sided difference quotients ``(d/dtau-, d/dtau+)`` at the orbifold class."""
    deg = as_degeneration(model)
    h = Fraction(h)
    f0 = deg._futs2(c_base, 0, 0)
    return (deg._futs2(c_base, h, 0) - f0) / h, (deg._futs2(c_base, 0, h) - f0) / h


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def gradient_signs(model, c_base=10 ** 4, h=Fraction(1, 2 ** 6), stable=3, depth=40) -> tuple:
    """Signs of the two partial derivatives at ``tau+- = 0``.

    ``h`` is halved until both signs repeat ``stable`` times in a row.
    """
    deg = as_degeneration(model)
    h = Fraction(h)
    history = []
    for _ in range(depth):
        dm, dp = gradient(deg, c_base, h)
        history.append((_sign(dm), _sign(dp)))
        if len(history) >= stable and len(set(history[-stable:])) == 1 and 0 not in history[-1]:
            return history[-1]
        h /= 2
    raise IndeterminateSign(f"signs did not stabilize within {depth} halvings: {history[-stable:]}")


@dataclass
class DestabilizationCertificate:
    """Exact witness that a test configuration has non-positive Donaldson-Futaki invariant."""

    section: str
    slope: Fraction
    regime: str
    model: CentralFiberModel
    cremona_steps: list
    c_base: Fraction
    tau_minus: Fraction
    tau_plus: Fraction
    inner: Fraction
    futaki: Fraction
    donaldson_futaki: Fraction
    volume: Fraction
    kahler_check: KahlerCheck
    multi_point: bool = False
    search_steps: int = 0

    def as_dict(self) -> dict:
        f = format_fraction
        return {
            "section": self.section,
            "slope": f(self.slope),
            "regime": self.regime,
            "multi_point_experimental": self.multi_point,
            "central_fiber": {
                "genus": self.model.genus,
                "deg_plus": self.model.deg_plus,
                "deg_minus": self.model.deg_minus,
                "points": [
                    {"fiber": pt.fiber_id, "weight": str(pt.weight),
                     "section": "S+" if pt.on_plus else "S-"}
                    for pt in self.model.points
                ],
                "cremona_steps": [
                    {"fiber": s.fiber_id, "before": str(s.weight_before), "after": str(s.weight_after)}
                    for s in self.cremona_steps
                ],
            },
            "kahler_parameters": {
                "c_base": f(self.c_base),
                "tau_minus": f(self.tau_minus),
                "tau_plus": f(self.tau_plus),
                "inner": f(self.inner),
            },
            "futaki": f(self.futaki),
            "donaldson_futaki": f(self.donaldson_futaki),
            "volume": f(self.volume),
            "kahler_check": self.kahler_check.as_dict(),
            "search_steps": self.search_steps,
        }


def _inner_area(deg: Degeneration, tau_minus, tau_plus) -> Fraction:
    heaviest = max((sum(n.w for n in ch.string_nodes() if n.label not in ("E-1", "E+1"))
                    for ch in deg.chains), default=0)
    if heaviest == 0:
        return Fraction(0)
    return min(tau_minus, tau_plus) ** 2 / (2 * heaviest)


def destabilize(surface: ParabolicSurface, section_id, budget: int = 60,
                c_base0=1000) -> DestabilizationCertificate:
    """Search the family for a class with non-positive Futaki invariant.

    Negative slope: ``tau- = tau+`` shrink by halving.  Zero slope with
    marked points: ``tau+`` is tied to ``tau-`` so that the first-order term
    is negative.  Zero slope without marked points: the invariant vanishes.
    ``c_base`` doubles every fourth step.
    """
    slope = par_slope(surface, section_id)
    if slope > 0:
        raise NotDestabilizing(f"section {section_id!r} has positive slope {slope}")
    model, steps = normalize_to_splus(central_fiber(surface, section_id))
    deg = Degeneration(model)
    if slope < 0:
        regime, ratio = "negative_slope", ONE
    elif deg.chains:
        regime = "zero_slope"
        a = sum((pt.weight.value for pt in model.points), Fraction(0))
        b = sum((1 - pt.weight.value for pt in model.points), Fraction(0))
        ratio = a / (2 * b)
    else:
        regime, ratio = "zero_slope_trivial", ONE

    last = {}
    for s in range(budget):
        c_base = Fraction(c_base0) * 2 ** (s // 4)
        tau_minus = Fraction(1, 2 ** (s + 3))
        tau_plus = tau_minus * ratio
        inner = _inner_area(deg, tau_minus, tau_plus)
        value = deg.futaki_futs2(c_base, tau_minus, tau_plus, inner)
        check = deg.kahler_check(c_base, tau_minus, tau_plus, inner)
        last = {"c_base": c_base, "tau_minus": tau_minus, "tau_plus": tau_plus,
                "futaki": value, "kahler_failures": check.failures()}
        ok = value <= 0 if regime == "zero_slope_trivial" else value < 0
        if ok and check.passed:
            sq = deg.omega_sq(c_base, tau_minus, tau_plus, inner)
            return DestabilizationCertificate(
                section=section_id, slope=slope, regime=regime, model=model,
                cremona_steps=steps, c_base=c_base, tau_minus=tau_minus, tau_plus=tau_plus,
                inner=inner, futaki=value, donaldson_futaki=donaldson_futaki(value, sq),
                volume=sq / 2, kahler_check=check, multi_point=deg.multi_point,
                search_steps=s + 1,
            )
    raise SearchExhausted(f"no destabilizing class within {budget} steps", last)


def verify_certificate(cert: DestabilizationCertificate) -> bool:
    """Recompute the invariants from the stored parameters and compare exactly."""
    deg = Degeneration(cert.model)
    value = deg.futaki_futs2(cert.c_base, cert.tau_minus, cert.tau_plus, cert.inner)
    sq = deg.omega_sq(cert.c_base, cert.tau_minus, cert.tau_plus, cert.inner)
    check = deg.kahler_check(cert.c_base, cert.tau_minus, cert.tau_plus, cert.inner)
    return (
        value == cert.futaki
        and donaldson_futaki(value, sq) == cert.donaldson_futaki
        and value <= 0
        and check.passed
    )


# grid scans


def grid_values(n: int, tau_max) -> list:
    tau_max = Fraction(tau_max)
    if n < 1:
        raise ValueError("grid size must be positive")
    if not 0 < tau_max < 1:
        raise OutOfRange(f"tau_max = {tau_max} is not in (0, 1)")
    return [tau_max * i / n for i in range(1, n + 1)]


@functools.lru_cache(maxsize=4)
def _cached_degeneration(model: CentralFiberModel) -> Degeneration:
    return Degeneration(model)


def _scan_row(args):
    model, c_base, tau_minus, taus = args
    deg = _cached_degeneration(model)
    return [(tau_minus, tp, deg.futaki_futs2(c_base, tau_minus, tp)) for tp in taus]


def scan(model, c_base, n: int, tau_max=Fraction(1, 16), threads: Optional[int] = None) -> list:
    """Futaki values on the ``n x n`` grid ``tau+- = tau_max * i/n``.

    Rows come back ordered by ``(tau-, tau+)`` whatever the thread count.
    """
    deg = as_degeneration(model)
    taus = grid_values(n, tau_max)
    jobs = [(deg.model, Fraction(c_base), tm, taus) for tm in taus]
    threads = threads or 1
    if threads == 1:
        rows = [_scan_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_scan_row, jobs))
    return [r for row in rows for r in row]


def default_threads() -> int:
    env = os.environ.get("PARABLOW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1
