import random
from dataclasses import replace
from fractions import Fraction

import pytest

from parablow.continued_fractions import Weight
from parablow.errors import NonPositiveSquare, NotDestabilizing, OutOfRange, SearchExhausted
from parablow.futaki import (
    Degeneration,
    FutakiInput,
    destabilize,
    donaldson_futaki,
    futaki,
    futaki_futs2,
    futaki_limit,
    gradient,
    gradient_signs,
    integral_st,
    integral_t,
    saddle_correction,
    verify_certificate,
)
from parablow.lattice import SurfaceLattice, H2Class
from parablow.surface import (
    CentralFiberModel,
    MarkedPoint,
    ModelPoint,
    ParabolicSurface,
    SectionData,
    central_fiber,
)

from conftest import random_model, random_slope_zero_surface
from oracles import intst_float

Fr = Fraction


def single(alpha, d_plus=0, d_minus=0, genus=2):
    return Degeneration(CentralFiberModel(genus, d_plus, d_minus, (ModelPoint("p", Weight.parse(alpha), True),)))


def half_pair():
    # alpha = 1/2 on S and alpha = 1/2 off S, normalized: both on S_+ with deg L_- = 1
    s = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 2), {"S"}), MarkedPoint("q", Weight(1, 2))],
                         [SectionData("S", 0)])
    return Degeneration(central_fiber(s, "S"))


def test_integral_t_degenerate_telescopes():
    for alpha in ("1/2", "2/5", "4/11"):
        d = single(alpha, 0, 1)
        inp = d.degenerate_input(100)
        a = Weight.parse(alpha).value
        expected = (inp.s_hat_minus_sq - inp.s_hat_plus_sq + 6 * inp.separation + a - (1 - a)) / 96
        assert integral_t(inp) == expected
        assert integral_t(inp) == -d.slope_plus / 12


def test_polystable_degenerate_vanishes():
    inp = half_pair().degenerate_input(1000)
    assert integral_t(inp) == 0 and integral_st(inp) == 0 and futaki(inp) == 0


def test_symmetric_input_vanishes():
    t = Fr(3, 10)
    inp = FutakiInput(((1, 2, 1),), ((-t, t),), Fr(-2), Fr(2), Fr(0), Fr(1))
    # S^_-^2 - S^_+^2 does not vanish here, so compare against it alone
    assert integral_t(inp) == Fr(-4, 96)
    assert saddle_correction(inp) == 0


def test_unit_weights_drop_saddle_term():
    inp = FutakiInput(((1, 1, 1),), ((Fr(-1, 2), Fr(1, 3)),), Fr(0), Fr(-1), Fr(2, 7), Fr(1))
    assert integral_st(inp) == Fr(2, 7)


def test_saddle_closed_form_half():
    d = single("1/2")
    for tm, tp in [(Fr(1, 10), Fr(1, 100)), (Fr(1, 3), Fr(2, 7))]:
        inp = d.futs2_input(50, tm, tp)
        closed = -Fr(1, 8) * ((1 - tp) ** 2 - (1 - tm) ** 2)
        assert saddle_correction(inp) == closed
        oracle = intst_float(inp.weights, inp.profiles, 0.0)
        assert abs(oracle - float(closed)) < 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        FutakiInput(((1, 2, 1),), ((Fr(1, 2), Fr(-1, 2)),), 0, 0, 0, 1)
    with pytest.raises(OutOfRange):
        FutakiInput(((1, 2, 1),), ((Fr(-2), Fr(0)),), 0, 0, 0, 1)
    with pytest.raises(ValueError):
        FutakiInput(((1, 2, 1),), ((Fr(0),),), 0, 0, 0, 1)


def test_futaki_limit_examples():
    assert futaki_limit(1, Fr(-1, 2)) == Fr(-1, 6)
    assert futaki_limit(Fr(7, 5), 0) == 0
    assert abs(futaki_limit(1 + Fr(1, 10 ** 9), 1) - Fr(1, 3)) < Fr(1, 10 ** 8)


def test_degenerate_equals_limit():
    rng = random.Random(3)
    for _ in range(20):
        d = Degeneration(random_model(rng, normalized=True))
        c = 500 + rng.randint(0, 1000)
        assert futaki(d.degenerate_input(c)) == d.limit_value(c)


def test_futs2_symmetric_pair_vanishes():
    d = half_pair()
    assert d.futaki_futs2(1000, Fr(1, 10), Fr(1, 10)) == 0
    assert d.futaki_futs2(10 ** 4, Fr(1, 10), Fr(1, 100)) < 0


def test_negative_slope_sign():
    d = single("1/3")
    assert d.slope_plus == Fr(-1, 3)
    assert d.futaki_futs2(10 ** 4, Fr(1, 2 ** 10), Fr(1, 2 ** 10)) < 0


def test_futs2_range_checks():
    d = single("1/3")
    for tm, tp in [(0, Fr(1, 2)), (Fr(1, 2), 1), (Fr(-1, 2), Fr(1, 2))]:
        with pytest.raises(OutOfRange):
            d.futaki_futs2(100, tm, tp)
    with pytest.raises(OutOfRange):
        d.futaki_futs2(100, Fr(1, 2), Fr(1, 2), inner=-1)
    with pytest.raises(TypeError):
        futaki_futs2("not a model", 1, Fr(1, 2), Fr(1, 2))


def test_consistency_with_profile_builder():
    rng = random.Random(11)
    for _ in range(30):
        d = Degeneration(random_model(rng, normalized=True))
        c = rng.randint(100, 10 ** 4)
        tm, tp = Fr(rng.randint(1, 50), 1000), Fr(rng.randint(1, 50), 1000)
        inp = d.futs2_input(c, tm, tp)
        value = futaki_futs2(d.model, c, tm, tp)
        assert value == futaki(inp, saddle=False)
        # the full integral differs exactly by the saddle term
        assert futaki(inp) - value == -saddle_correction(inp)


def test_separation_conventions():
    d = single("2/7", 0, 1)
    tm, tp = Fr(1, 10), Fr(1, 7)
    a = Fr(2, 7)
    assert d.lattice_separation(300, tm, tp) == d.slope_plus + a * tm + (a - 1) * tp
    assert d.lattice_separation(300, tm, tp) - d.separation(300, tm, tp) == 2 * d.slope_plus


def test_limit_consistency():
    rng = random.Random(5)
    for _ in range(8):
        d = Degeneration(random_model(rng, max_q=15, normalized=True))
        target = d.limit_value(1000)
        gaps = [abs(d.futaki_futs2(1000, Fr(1, 2 ** n), Fr(1, 2 ** n)) - target) for n in range(6, 31)]
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < Fr(1, 2 ** 20)


def test_sign_follows_slope_random():
    rng = random.Random(17)
    for _ in range(40):
        d = Degeneration(random_model(rng, max_q=20, max_points=1, normalized=True))
        if d.slope_plus == 0:
            continue
        value = d.futaki_futs2(1000, Fr(1, 2 ** 10), Fr(1, 2 ** 10))
        assert (value > 0) - (value < 0) == (d.slope_plus > 0) - (d.slope_plus < 0)


def test_gradient_signs_examples():
    assert gradient_signs(single("1/3"), 10 ** 4) == (-1, 1)
    d = half_pair()
    assert gradient_signs(d, 10 ** 4) == (-1, 1)
    # along tau- = tau+ the quotient vanishes exactly
    h = Fr(1, 2 ** 20)
    assert d.futaki_futs2(10 ** 4, h, h) - d._futs2(10 ** 4, 0, 0) == 0
    dm, dp = gradient(d, 10 ** 4, h)
    assert abs(dm + dp) < Fr(1, 10 ** 5)


def test_gradient_ratio_two_fifths():
    # five points of weight 2/5 on S_+ with S_+^2 = 2 give slope zero
    pts = tuple(ModelPoint(f"x{i}", Weight(2, 5), True) for i in range(5))
    d = Degeneration(CentralFiberModel(1, 0, 2, pts))
    assert d.slope_plus == 0
    dm, dp = gradient(d, 10 ** 5, Fr(1, 2 ** 24))
    scale = abs(dm) + abs(dp)
    assert abs(dp / scale - Fr(3, 5)) < Fr(1, 1000)
    assert abs(dm / scale + Fr(2, 5)) < Fr(1, 1000)


def test_both_signs_in_dyadic_boxes():
    rng = random.Random(23)
    models = [half_pair()] + [Degeneration(central_fiber(random_slope_zero_surface(rng), "S")) for _ in range(3)]
    for d in models:
        a = sum(p.weight.value for p in d.model.points)
        b = sum(1 - p.weight.value for p in d.model.points)
        for n in range(1, 11):
            box = Fr(1, 2 ** n)
            lo = box / 64
            # the first-order term is (1-r/4) * (b tau+ - a tau-)
            neg = d.futaki_futs2(1000, box / 2, min(box / 2, box * a / (4 * b)) if b else lo)
            pos = d.futaki_futs2(1000, min(box / 2, box * b / (4 * a)) if a else lo, box / 2)
            assert neg < 0 < pos, (n, d.model)


def test_zero_set_bisection():
    d = half_pair()
    lo, hi = (Fr(1, 20), Fr(1, 200)), (Fr(1, 200), Fr(1, 20))
    f = lambda s: d.futaki_futs2(1000, lo[0] + s * (hi[0] - lo[0]), lo[1] + s * (hi[1] - lo[1]))
    a, b = Fr(0), Fr(1)
    assert f(a) < 0 < f(b)
    while b - a > Fr(1, 2 ** 40):
        mid = (a + b) / 2
        if f(mid) < 0:
            a = mid
        else:
            b = mid
    assert f(a) < 0 <= f(b) and b - a <= Fr(1, 2 ** 40)


def test_donaldson_futaki():
    assert donaldson_futaki(0, 7) == 0
    assert donaldson_futaki(Fr(-1, 6), 20) == Fr(-1, 240)
    lat = SurfaceLattice(0, 0, 0)
    omega = H2Class.hyperplane() + 10 * H2Class.fiber()
    assert donaldson_futaki(Fr(-1, 6), omega, lat) == Fr(-1, 240)
    with pytest.raises(NonPositiveSquare):
        donaldson_futaki(1, 0)
    with pytest.raises(ValueError):
        donaldson_futaki(1, omega)
    for v in (Fr(-3, 4), Fr(2, 9)):
        assert (donaldson_futaki(v, 3) > 0) == (v > 0)


def test_destabilize_negative_slope():
    s = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 3), {"S"})], [SectionData("S", 0)])
    cert = destabilize(s, "S")
    assert cert.regime == "negative_slope" and not cert.multi_point
    assert cert.futaki < 0 and cert.donaldson_futaki < 0
    assert cert.donaldson_futaki == cert.futaki / (4 * cert.volume)
    assert cert.kahler_check.passed and verify_certificate(cert)


def test_destabilize_zero_slope_pair():
    s = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 2), {"S"}), MarkedPoint("q", Weight(1, 2))],
                         [SectionData("S", 0)])
    cert = destabilize(s, "S")
    assert cert.regime == "zero_slope" and cert.multi_point
    assert cert.tau_minus > cert.tau_plus
    assert cert.futaki < 0 and verify_certificate(cert)
    assert len(cert.cremona_steps) == 1


def test_destabilize_trivial_and_errors():
    s = ParabolicSurface(1, 0, [], [SectionData("S", 0)])
    cert = destabilize(s, "S")
    assert cert.futaki == 0 and cert.regime == "zero_slope_trivial" and verify_certificate(cert)
    pos = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 3))], [SectionData("S", 0)])
    with pytest.raises(NotDestabilizing):
        destabilize(pos, "S")
    neg = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 3), {"S"})], [SectionData("S", 0)])
    with pytest.raises(SearchExhausted) as err:
        destabilize(neg, "S", budget=0)
    assert err.value.diagnostics == {}


def test_tampered_certificate_fails():
    s = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(1, 3), {"S"})], [SectionData("S", 0)])
    cert = destabilize(s, "S")
    assert not verify_certificate(replace(cert, futaki=cert.futaki + Fr(1, 10 ** 30)))
    assert not verify_certificate(replace(cert, c_base=cert.c_base + 1))


def test_certificate_json_round_trip():
    s = ParabolicSurface(2, 0, [MarkedPoint("p", Weight(2, 5), {"S"})], [SectionData("S", 0)])
    data = destabilize(s, "S").as_dict()
    assert Fr(data["futaki"]) < 0
    assert data["kahler_check"]["passed"]
    assert all(Fr(v) > 0 for v in data["kahler_parameters"].values())
