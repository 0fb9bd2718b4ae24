"""Iterated blowup over a marked fiber and Cremona transformations.

Starting from a fiber ``F`` through the marked point, blow up the point,
then the intersection of the two resulting -1 curves, and keep blowing
up one of the two points where the current -1 curve meets the rest of the
string.  The choice at each step is forced by the weight: the -1 curve
carries multiplicities ``(w, v)`` in the pullbacks of ``F`` and of the first
exceptional divisor, ``v/w`` walks down the Stern-Brocot tree and the
process stops when ``v/w = p/q``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterator

from .continued_fractions import Weight, as_weight, dual_expand, hj_expand
from .errors import PointNotOnSMinus
from .lattice import H2Class, intersect

LEFT = "L"
RIGHT = "R"


@dataclass(frozen=True)
class CurveNode:
    """One rational curve in the exceptional string over a marked fiber."""

    label: str
    w: int
    v: int
    cls: H2Class

    @property
    def self_int(self) -> int:
        return int(intersect(self.cls, self.cls))


@dataclass(frozen=True)
class BlowupTrace:
    """Left/right decisions made after the two forced initial blowups."""

    choices: tuple = ()

    def __str__(self):
        return "".join(self.choices) or "-"


@dataclass(frozen=True)
class FiberChain:
    """The string ``E-_1 ... E-_k, E_0, E+_l ... E+_1`` over one marked fiber.

    ``E-_1`` is the proper transform of the fiber and meets ``S^_-``;
    ``E+_1`` is the proper transform of the first exceptional divisor and
    meets ``S^_+``.
    """

    fiber_id: object
    weight: Weight
    nodes: tuple
    e0_index: int
    blowup_ids: tuple
    center_on_plus: bool = True

    @property
    def k(self) -> int:
        return self.e0_index

    @property
    def l(self) -> int:
        return len(self.nodes) - self.e0_index - 1

    @property
    def central(self) -> CurveNode:
        return self.nodes[self.e0_index]

    @property
    def self_ints(self) -> list:
        return [n.self_int for n in self.nodes]

    @property
    def w(self) -> list:
        return [n.w for n in self.nodes]

    @property
    def v(self) -> list:
        return [n.v for n in self.nodes]

    def string_nodes(self) -> list:
        """All nodes except the central -1 curve."""
        return [n for i, n in enumerate(self.nodes) if i != self.e0_index]

    def node(self, label: str) -> CurveNode:
        for n in self.nodes:
            if n.label == label:
                return n
        raise KeyError(label)

    def _combine(self, coeffs) -> H2Class:
        f, e = 0, {}
        for c, n in zip(coeffs, self.nodes):
            f += c * n.cls.coeff_F
            for k, x in n.cls.coeff_E:
                e[k] = e.get(k, 0) + c * x
        return H2Class(coeff_F=f, coeff_E=e)

    def fiber_class(self) -> H2Class:
        return self._combine(self.w)

    def first_exceptional_class(self) -> H2Class:
        return self._combine(self.v)


def id_allocator(start: int = 1) -> Callable[[], int]:
    """Shared counter for exceptional class ids across fibers."""
    counter: Iterator[int] = itertools.count(start)
    return lambda: next(counter)


def _label_nodes(nodes: list, e0: int) -> list:
    k = e0
    l = len(nodes) - e0 - 1
    out = []
    for i, (w, v, cls) in enumerate(nodes):
        if i < e0:
            label = f"E-{i + 1}"
        elif i == e0:
            label = "E0"
        else:
            label = f"E+{k + l + 1 - i}"
        out.append(CurveNode(label, w, v, cls))
    return out


def build_chain(alpha, fiber_class: H2Class = None, alloc: Callable[[], int] = None,
                fiber_id=0) -> tuple[FiberChain, BlowupTrace]:
    """Run the blowup procedure for the weight ``alpha``.

    ``fiber_class`` is the class of the fiber being blown up (``F`` by
    default) and ``alloc`` hands out fresh exceptional ids.
    """
    alpha = as_weight(alpha)
    if fiber_class is None:
        fiber_class = H2Class.fiber()
    if fiber_class.coeff_C != 0 or intersect(fiber_class, fiber_class) != 0:
        raise ValueError("fiber class must be supported on fibers with self-intersection 0")
    if alloc is None:
        alloc = id_allocator()

    e1, e2 = alloc(), alloc()
    # classes as (fiber coefficient, {blowup id: coefficient}) while building
    f0 = fiber_class.coeff_F
    base_e = dict(fiber_class.coeff_E)
    # (w, v, class); after blowing up x and then F^ n E^
    nodes = [
        [1, 0, (f0, {**base_e, e1: base_e.get(e1, 0) - 1, e2: base_e.get(e2, 0) - 1})],
        [2, 1, (0, {e2: 1})],
        [1, 1, (0, {e1: 1, e2: -1})],
    ]
    ids = [e1, e2]
    idx = 1
    choices = []
    target = alpha.value
    while Fraction(nodes[idx][1], nodes[idx][0]) != target:
        go_left = target < Fraction(nodes[idx][1], nodes[idx][0])
        nb = idx - 1 if go_left else idx + 1
        new_id = alloc()
        ids.append(new_id)
        nodes[idx][2][1][new_id] = -1
        nodes[nb][2][1][new_id] = -1
        new = [nodes[idx][0] + nodes[nb][0], nodes[idx][1] + nodes[nb][1], (0, {new_id: 1})]
        if go_left:
            nodes.insert(idx, new)
            choices.append(LEFT)
        else:
            nodes.insert(idx + 1, new)
            idx += 1
            choices.append(RIGHT)

    chain = FiberChain(
        fiber_id=fiber_id,
        weight=alpha,
        nodes=tuple(_label_nodes([(w, v, H2Class(coeff_F=f, coeff_E=e)) for w, v, (f, e) in nodes], idx)),
        e0_index=idx,
        blowup_ids=tuple(ids),
    )
    return chain, BlowupTrace(tuple(choices))


def replay(alpha, trace: BlowupTrace) -> list:
    """Self-intersections obtained by replaying ``trace`` from the start configuration."""
    alpha = as_weight(alpha)
    selfs = [-2, -1, -2]
    idx = 1
    for c in trace.choices:
        nb = idx - 1 if c == LEFT else idx + 1
        selfs[idx] -= 1
        selfs[nb] -= 1
        if c == LEFT:
            selfs.insert(idx, -1)
        else:
            selfs.insert(idx + 1, -1)
            idx += 1
    return selfs


def expected_self_ints(alpha) -> list:
    """Self-intersections predicted by the two continued fraction expansions."""
    left = [-e for e in hj_expand(alpha)]
    right = [-e for e in reversed(dual_expand(alpha))]
    return left + [-1] + right


@dataclass(frozen=True)
class WeightIdentities:
    left_sum: Fraction
    right_sum: Fraction
    alpha: Fraction

    @property
    def ok(self) -> bool:
        return self.left_sum == self.alpha and self.right_sum == 1 - self.alpha


def weight_identities(chain: FiberChain) -> WeightIdentities:
    """``sum 1/(w_n w_{n+1})`` along each string, ending at the central curve."""
    w = chain.w
    e0 = chain.e0_index
    left = sum((Fraction(1, w[n] * w[n + 1]) for n in range(e0)), Fraction(0))
    right = sum((Fraction(1, w[n] * w[n + 1]) for n in range(e0, len(w) - 1)), Fraction(0))
    return WeightIdentities(left, right, chain.weight.value)


@dataclass(frozen=True)
class CremonaData:
    """Local data at one marked fiber of a ruled surface with two disjoint sections."""

    weight: Weight
    on_minus: bool
    s_minus_sq: int
    s_plus_sq: int

    def slopes(self, other_plus: Fraction = Fraction(0), other_minus: Fraction = Fraction(0)):
        """Parabolic slopes of ``(S_+, S_-)``; ``other_*`` collects the other points' terms."""
        a = self.weight.value
        if self.on_minus:
            return self.s_plus_sq + a + other_plus, self.s_minus_sq - a + other_minus
        return self.s_plus_sq - a + other_plus, self.s_minus_sq + a + other_minus


def cremona(data: CremonaData, from_section: str = "-") -> CremonaData:
    """Blow up the marked point and contract the fiber's proper transform.

    The point moves to the other section and its weight becomes ``1 - a``.
    With ``from_section="+"`` the mirror transformation is applied, which
    undoes a transformation from ``S_-``.
    """
    if from_section == "-":
        if not data.on_minus:
            raise PointNotOnSMinus("marked point does not lie on S_-")
        return replace(
            data,
            weight=data.weight.complement(),
            on_minus=False,
            s_minus_sq=data.s_minus_sq - 1,
            s_plus_sq=data.s_plus_sq + 1,
        )
    if from_section == "+":
        if data.on_minus:
            raise ValueError("marked point does not lie on S_+")
        return replace(
            data,
            weight=data.weight.complement(),
            on_minus=True,
            s_minus_sq=data.s_minus_sq + 1,
            s_plus_sq=data.s_plus_sq - 1,
        )
    raise ValueError(f"from_section must be '-' or '+', got {from_section!r}")
