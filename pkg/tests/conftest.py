import random
import sys
from math import gcd
from pathlib import Path

import pytest
from hypothesis import settings

from parablow.continued_fractions import Weight
from parablow.surface import CentralFiberModel, MarkedPoint, ModelPoint, ParabolicSurface, SectionData

settings.register_profile("parablow", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("parablow")

FIXTURES = Path(__file__).parent / "fixtures"


def random_weight(rng, max_q):
    q = rng.randint(2, max_q)
    while True:
        p = rng.randint(1, q - 1)
        if gcd(p, q) == 1:
            return Weight(p, q)


def random_model(rng, max_q=20, max_points=3, normalized=False, max_gap=3):
    """Split model with random degrees and points on either section."""
    n = rng.randint(1, max_points)
    points = tuple(
        ModelPoint(f"x{i}", random_weight(rng, max_q), normalized or rng.random() < 0.5)
        for i in range(n)
    )
    d_plus = rng.randint(-2, 2)
    return CentralFiberModel(rng.randint(0, 3), d_plus, d_plus + rng.randint(-max_gap, max_gap), points)


def random_slope_zero_surface(rng, max_q=12):
    """Surface with a section of parabolic slope exactly zero.

    Built from blocks whose weights sum to an integer: a point on S with a
    partner of the same weight off S, or points on S summing to 1.
    """
    marked = []
    self_int = 0
    blocks = rng.randint(1, 2)
    for b in range(blocks):
        kind = rng.choice(("pair", "complement", "triple"))
        if kind == "pair":
            w = random_weight(rng, max_q)
            marked += [MarkedPoint(f"a{b}", w, {"S"}), MarkedPoint(f"b{b}", w)]
        elif kind == "complement":
            w = random_weight(rng, max_q)
            marked += [MarkedPoint(f"a{b}", w, {"S"}), MarkedPoint(f"b{b}", w.complement(), {"S"})]
            self_int += 1
        else:
            marked += [MarkedPoint(f"{c}{b}", Weight(1, 3), {"S"}) for c in "abc"]
            self_int += 1
    genus = rng.randint(0, 3)
    return ParabolicSurface(genus, self_int, marked, [SectionData("S", self_int)])


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
