"""Exact-arithmetic tools for parabolic ruled surfaces.

Stability of parabolic structures, the iterated blowups they encode, and
Futaki invariants of the resulting test configurations, all over the
rationals.
"""

from .blowup import (
    BlowupTrace,
    CremonaData,
    CurveNode,
    FiberChain,
    build_chain,
    cremona,
    expected_self_ints,
    replay,
    weight_identities,
)
from .continued_fractions import Weight, dual_expand, format_fraction, hj_eval, hj_expand
from .errors import *  # noqa: F401,F403
from .futaki import (
    Degeneration,
    DestabilizationCertificate,
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
    scan,
    verify_certificate,
)
from .lattice import (
    H2Class,
    SurfaceLattice,
    canonical_first_chern,
    kahler_from_areas,
    kahler_necessary_check,
    mean_scalar,
    orbifold_euler_characteristic,
    orbifold_mean_scalar,
    section_classes,
    volume,
)
from .surface import (
    CentralFiberModel,
    MarkedPoint,
    ModelPoint,
    ParabolicSurface,
    SectionData,
    Verdict,
    central_fiber,
    classify_stability,
    normalize_to_splus,
    par_slope,
)

__version__ = "0.1.0"
