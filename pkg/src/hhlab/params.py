"""Parameter arithmetic for the Hardy-Henon heat equation u_t - Lap u = |x|^g |u|^(a-1) u.

Everything here is exact when the inputs are rational (ints, Fractions or
strings such as "5/3"). Floats are accepted and then boundary comparisons
fall back to an absolute tolerance (default 1e-12). Infinity is a regular
exponent value with 1/inf = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

INF = math.inf
DEFAULT_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a quantity is undefined for the given parameters."""


def exponent(value):
    """Coerce user input into a Fraction, a float, or INF."""
    if isinstance(value, bool):
        raise TypeError("boolean is not an exponent")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value):
            if value < 0:
                raise ValueError("negative infinity is not an exponent")
            return INF
        if math.isnan(value):
            raise ValueError("nan is not an exponent")
        return value
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo", "∞", "+inf"):
            return INF
        try:
            return Fraction(text)
        except ValueError:
            return exponent(float(text))
    raise TypeError(f"cannot interpret {value!r} as an exponent")


def is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def inv(x):
    """Reciprocal with 1/inf = 0."""
    if is_inf(x):
        return Fraction(0)
    if x == 0:
        raise DomainError("reciprocal of zero")
    return 1 / x


def compare(a, b, tol: float = DEFAULT_TOL) -> int:
    """Three-way comparison; exact for rationals, tolerant otherwise."""
    if is_inf(a) or is_inf(b):
        if is_inf(a) and is_inf(b):
            return 0
        return 1 if is_inf(a) else -1
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (a > b) - (a < b)
    diff = float(a) - float(b)
    if abs(diff) <= tol:
        return 0
    return 1 if diff > 0 else -1


def as_float(x) -> float:
    return INF if is_inf(x) else float(x)


def fmt(x) -> str:
    if is_inf(x):
        return "inf"
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


@dataclass(frozen=True)
class ProblemParams:
    """Dimension d, weight power gamma, nonlinearity power alpha."""

    d: int
    gamma: object
    alpha: object

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "gamma", exponent(self.gamma))
        object.__setattr__(self, "alpha", exponent(self.alpha))
        if is_inf(self.gamma) or is_inf(self.alpha):
            raise ValueError("gamma and alpha must be finite")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")

    @property
    def hardy_admissible(self) -> bool:
        return self.gamma > -min(2, self.d)


@dataclass(frozen=True)
class SpaceParams:
    """Lorentz exponents q, r and the power weight s."""

    q: object
    r: object = INF
    s: object = 0

    def __post_init__(self):
        object.__setattr__(self, "q", exponent(self.q))
        object.__setattr__(self, "r", exponent(self.r))
        object.__setattr__(self, "s", exponent(self.s))
        if not self.q >= 1:
            raise ValueError("q must be at least 1")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if is_inf(self.s):
            raise ValueError("s must be finite")
        if is_inf(self.q) and not is_inf(self.r):
            raise ValueError("q = inf requires r = inf")

    def scaling_sum(self, d: int):
        """s/d + 1/q, the quantity that decides every critical case."""
        return self.s / d + inv(self.q)


@dataclass(frozen=True)
class CriticalExponents:
    q_c: object
    Q_c: object
    s_c: object
    S_c: object
    alpha_star: object
    alpha_F: object
    alpha_HS: object
    q_star: object


def serrin_exponent(d: int, gamma):
    if d <= 2:
        return INF
    return (d + gamma) / Fraction(d - 2) if isinstance(gamma, Fraction) else (d + gamma) / (d - 2)


def critical_exponents(p: ProblemParams, sp: SpaceParams) -> CriticalExponents:
    d, g, a = p.d, p.gamma, p.alpha
    if not d + g > 0:
        raise DomainError("the integrability exponent needs d + gamma > 0")
    q_c = d * (a - 1) / (2 + g)
    Q_c = d * a / (d + g)
    s_c = (2 + g) / (a - 1) - d * inv(sp.q)
    S_c = (d + g) / a - d * inv(sp.q)
    a_star = serrin_exponent(d, g)
    a_F = 1 + (2 + g) / Fraction(d) if isinstance(g, Fraction) else 1 + (2 + g) / d
    if d > 2:
        a_HS = (d + 2 + 2 * g) / (Fraction(d - 2) if isinstance(g, Fraction) else d - 2)
        q_star = d * (a_star - 1) / 2
    else:
        a_HS = INF
        q_star = INF
    return CriticalExponents(q_c, Q_c, s_c, S_c, a_star, a_F, a_HS, q_star)


# regime labels
DOUBLE_SUBCRITICAL = "DoubleSubcritical"
SINGLE_CRITICAL_I = "SingleCriticalI"
SINGLE_CRITICAL_II = "SingleCriticalII"
DOUBLE_CRITICAL = "DoubleCritical"
SUPERCRITICAL = "ScaleSupercritical"
OUTSIDE = "OutsideStandingAssumptions"
# the two scale-(sub)critical configurations beyond the integrability line
SUBCRITICAL_NONINTEGRABLE = "ScaleSubcriticalNonintegrable"
CRITICAL_NONINTEGRABLE = "ScaleCriticalNonintegrable"

# verdict labels
UNCONDITIONAL = "UnconditionalUniqueness"
NONUNIQUE = "NonUniqueness"
SUFFICIENT_ONLY = "SufficientConditionOnly"
CRITERION = "UniquenessCriterion"
ILL_POSED = "IllPosedNonlinearity"
OPEN = "Open"


@dataclass(frozen=True)
class SolutionSpace:
    time: str  # "bounded" (L^inf in time) or "continuous" (C in time)
    space: str
    completion: bool = False

    def label(self) -> str:
        outer = "L^inf(0,T; {})" if self.time == "bounded" else "C([0,T]; {})"
        inner = ("closure " if self.completion else "") + self.space
        return outer.format(inner)


@dataclass(frozen=True)
class RegimeVerdict:
    regime: str
    verdict: str
    solution_space: SolutionSpace | None
    citation: str
    notes: tuple = field(default_factory=tuple)

    def summary(self) -> str:
        return f"{self.regime} / {self.verdict} / {self.citation}"

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "verdict": self.verdict,
            "solution_space": self.solution_space.label() if self.solution_space else None,
            "citation": self.citation,
            "notes": list(self.notes),
        }


def _space(sp: SpaceParams, r=None) -> str:
    r = sp.r if r is None else r
    return f"L^{{{fmt(sp.q)},{fmt(r)}}}_{{{fmt(sp.s)}}}"


def nonlinearity_locally_integrable(p: ProblemParams, sp: SpaceParams, tol: float = DEFAULT_TOL) -> bool:
    """Whether |x|^g |u|^a is locally integrable for every u in the space."""
    if not p.d + p.gamma > 0:
        raise DomainError("needs d + gamma > 0")
    x = sp.scaling_sum(p.d)
    bound = (p.d + p.gamma) / (p.d * p.alpha)
    c = compare(x, bound, tol)
    return c < 0 or (c == 0 and compare(sp.r, p.alpha, tol) <= 0)


def standing_assumptions(p: ProblemParams, sp: SpaceParams, tol: float = DEFAULT_TOL) -> list:
    """Names of the standing assumptions that fail (empty when all hold)."""
    d, g, a = p.d, p.gamma, p.alpha
    failed = []
    if not p.hardy_admissible:
        failed.append("gamma > -min(2, d)")
    if compare(a, max(Fraction(1), 1 + g / d), tol) <= 0:
        failed.append("alpha > max(1, 1 + gamma/d)")
    if compare(sp.q, a, tol) < 0:
        failed.append("alpha <= q")
    if compare(sp.s, g / (a - 1), tol) < 0:
        failed.append("gamma/(alpha-1) <= s")
    if compare(sp.s, d, tol) >= 0:
        failed.append("s < d")
    return failed


def _supercritical_selfsimilar(p: ProblemParams, sp: SpaceParams, tol) -> bool:
    d, g, a = p.d, p.gamma, p.alpha
    if d < 3 or not compare(g, -2, tol) > 0:
        return False
    if not compare(sp.q, 1, tol) > 0:
        return False
    g_cap = math.sqrt(3) - 1 if d == 3 else Fraction(0)
    if compare(g, g_cap, tol) > 0:
        return False
    ce = critical_exponents(p, sp)
    if not (compare(ce.alpha_F, a, tol) < 0 and compare(a, ce.alpha_HS, tol) < 0):
        return False
    x = sp.scaling_sum(d)
    return compare(inv(ce.q_c), x, tol) < 0 and compare(x, 1, tol) < 0


def _endpoint_line(p: ProblemParams, sp: SpaceParams, tol) -> RegimeVerdict:
    # d = 1, gamma = -1: the weight sits exactly at the Hardy threshold
    a = p.alpha
    ok = (compare(a, sp.q, tol) <= 0 and not is_inf(sp.q)
          and compare(sp.scaling_sum(1), 0, tol) == 0)
    if not ok:
        return RegimeVerdict(OUTSIDE, OPEN, None, "none",
                             ("d=1, gamma=-1 needs alpha <= q < inf and s + 1/q = 0",))
    if compare(sp.r, a - 1, tol) <= 0:
        return RegimeVerdict(SINGLE_CRITICAL_I, UNCONDITIONAL,
                             SolutionSpace("bounded", _space(sp)), "endpoint-line-uniqueness")
    return RegimeVerdict(SINGLE_CRITICAL_I, CRITERION,
                         SolutionSpace("bounded", _space(sp)), "endpoint-line-criterion",
                         (f"Duhamel part in {_space(sp, a - 1)}",))


def _exterior(p: ProblemParams, sp: SpaceParams, tol) -> RegimeVerdict:
    d, g, a = p.d, p.gamma, p.alpha
    q, r, s = sp.q, sp.r, sp.s
    qc0 = d * (a - 1) / 2
    Qc0 = a
    # the weight no longer matters near the origin, so only 1/q is compared
    x = inv(q)
    cq, cQ = compare(x, inv(qc0), tol), compare(x, inv(Qc0), tol)
    if cq > 0:
        regime = SUPERCRITICAL
    elif cq == 0 and cQ == 0:
        regime = DOUBLE_CRITICAL
    elif cq == 0:
        regime = SINGLE_CRITICAL_II if cQ < 0 else CRITICAL_NONINTEGRABLE
    elif cQ == 0:
        regime = SINGLE_CRITICAL_I
    elif cQ < 0:
        regime = DOUBLE_SUBCRITICAL
    else:
        regime = SUBCRITICAL_NONINTEGRABLE
    upper = d * (1 - a * inv(q))
    window = (compare(a, q, tol) <= 0
              and compare(-d * inv(q), s, tol) < 0
              and compare(s, upper, tol) < 0
              and compare(g / (a - 1), s, tol) <= 0)
    if not window:
        return RegimeVerdict(OUTSIDE, OPEN, None, "none", ("exterior parameter window fails",))
    r_inf = is_inf(r)
    c_min = compare(q, min(qc0, Qc0, key=as_float), tol)
    if c_min > 0 and r_inf:
        return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("bounded", _space(sp)),
                             "exterior-bounded")
    if (compare(q, Qc0, tol) == 0 and compare(Qc0, qc0, tol) > 0
            and compare(r, a, tol) == 0):
        return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("bounded", _space(sp)),
                             "exterior-bounded")
    if compare(q, qc0, tol) == 0:
        c = compare(qc0, Qc0, tol)
        if (c > 0 and r_inf) or (c == 0 and compare(r, a - 1, tol) == 0):
            return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("continuous", _space(sp)),
                                 "exterior-continuous")
    return RegimeVerdict(regime, OPEN, None, "none", ("exterior mode: no verdict applies",))


def scaling_regime(p: ProblemParams, sp: SpaceParams, tol: float = DEFAULT_TOL) -> str:
    """Position of s/d + 1/q against 1/q_c and 1/Q_c, ignoring other assumptions."""
    d, g, a = p.d, p.gamma, p.alpha
    x = sp.scaling_sum(d)
    inv_qc = (2 + g) / (d * (a - 1))
    inv_Qc = (d + g) / (d * a)
    cq, cQ = compare(x, inv_qc, tol), compare(x, inv_Qc, tol)
    if cq > 0:
        return SUPERCRITICAL
    if cq == 0:
        if cQ == 0:
            return DOUBLE_CRITICAL
        return SINGLE_CRITICAL_II if cQ < 0 else CRITICAL_NONINTEGRABLE
    if cQ == 0:
        return SINGLE_CRITICAL_I
    return DOUBLE_SUBCRITICAL if cQ < 0 else SUBCRITICAL_NONINTEGRABLE


def classify(p: ProblemParams, sp: SpaceParams, exterior: bool = False,
             tol: float = DEFAULT_TOL) -> RegimeVerdict:
    """Map a parameter tuple to its regime and uniqueness verdict."""
    d, g, a = p.d, p.gamma, p.alpha
    q, r = sp.q, sp.r
    if exterior:
        return _exterior(p, sp, tol)
    if d == 1 and compare(g, -1, tol) == 0:
        return _endpoint_line(p, sp, tol)
    if not p.hardy_admissible:
        return RegimeVerdict(OUTSIDE, OPEN, None, "none", ("gamma <= -min(2, d)",))

    regime = scaling_regime(p, sp, tol)
    if regime == SUPERCRITICAL and _supercritical_selfsimilar(p, sp, tol):
        return RegimeVerdict(regime, NONUNIQUE, SolutionSpace("continuous", _space(sp)),
                             "supercritical-selfsimilar",
                             ("global positive solution with zero initial data",))
    failed = standing_assumptions(p, sp, tol)
    if failed:
        return RegimeVerdict(OUTSIDE, OPEN, None, "none", tuple(failed))

    ce = critical_exponents(p, sp)
    integrable = nonlinearity_locally_integrable(p, sp, tol)
    q_finite = not is_inf(q)

    if regime == DOUBLE_SUBCRITICAL:
        x = sp.scaling_sum(d)
        edge_ok = compare(q, a, tol) != 0 or compare(r, a, tol) <= 0
        if edge_ok and compare(x, 0, tol) > 0:
            return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("bounded", _space(sp)),
                                 "subcritical-uniqueness")
    elif regime == SINGLE_CRITICAL_I and q_finite:
        if compare(r, a, tol) <= 0:
            return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("bounded", _space(sp)),
                                 "single-critical-I-uniqueness")
        r_conj = Fraction(1) if is_inf(r) else r / (r - 1)
        return RegimeVerdict(regime, SUFFICIENT_ONLY, SolutionSpace("bounded", _space(sp)),
                             "single-critical-I-sufficient",
                             (f"Duhamel part in {_space(sp, r_conj * (a - 1))}",))
    elif regime == SINGLE_CRITICAL_II and q_finite and d >= 3:
        return RegimeVerdict(regime, UNCONDITIONAL,
                             SolutionSpace("continuous", _space(sp), completion=is_inf(r)),
                             "single-critical-II-uniqueness")
    elif regime == DOUBLE_CRITICAL and q_finite and d >= 3:
        if compare(r, ce.alpha_star - 1, tol) <= 0:
            return RegimeVerdict(regime, UNCONDITIONAL, SolutionSpace("continuous", _space(sp)),
                                 "double-critical-uniqueness")
        if compare(g, -2, tol) > 0 and compare(ce.alpha_star, q, tol) <= 0:
            return RegimeVerdict(regime, NONUNIQUE,
                                 SolutionSpace("continuous", _space(sp), completion=is_inf(r)),
                                 "double-critical-nonuniqueness",
                                 ("regular and singular solutions coexist",
                                  f"uniqueness restored under Duhamel part in "
                                  f"{_space(sp, ce.alpha_star - 1)}"))
    if not integrable:
        return RegimeVerdict(regime, ILL_POSED, None, "none",
                             ("nonlinearity not locally integrable",))
    return RegimeVerdict(regime, OPEN, None, "none")


@dataclass(frozen=True)
class EstimateQuery:
    source: tuple  # (q1, r1, s1)
    target: tuple  # (q2, r2, s2)
    d: int

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(exponent(v) for v in self.source))
        object.__setattr__(self, "target", tuple(exponent(v) for v in self.target))
        q1, r1, _ = self.source
        _, r2, _ = self.target
        if not 1 <= q1 or not r1 > 0 or not r2 > 0:
            raise ValueError("exponents out of range")

    def sums(self):
        (q1, _, s1), (q2, _, s2) = self.source, self.target
        return s1 / self.d + inv(q1), s2 / self.d + inv(q2)


@dataclass(frozen=True)
class EstimateAnswer:
    admissible: bool
    decay_exponent: object
    violated_conditions: tuple

    def as_dict(self) -> dict:
        return {"admissible": self.admissible,
                "decay_exponent": fmt(self.decay_exponent),
                "violated_conditions": list(self.violated_conditions)}


# condition tags for the smoothing estimate
SUM_ORDER = "sum-ordering"            # 0 <= target sum <= source sum <= 1
WEIGHT_ORDER = "weight-ordering"      # s2 <= s1
SOURCE_ENDPOINT = "source-endpoint-r"  # r1 <= 1 at source sum 1 or q1 = 1
TARGET_ENDPOINT = "target-endpoint-r"  # r2 = inf at target sum 0
EQUAL_SUM_R = "equal-sum-r-ordering"   # r1 <= r2 at equal sums
INFINITE_Q = "infinite-q-r"           # r = inf when q = inf
SCALING_BALANCE = "scaling-balance"   # Duhamel bound: gain of exactly one time unit
STRICT_SUM_ORDER = "strict-sum-ordering"


def decay_exponent(query: EstimateQuery):
    (q1, _, s1), (q2, _, s2) = query.source, query.target
    return -Fraction(query.d, 2) * (inv(q1) - inv(q2)) - (s1 - s2) / 2


def estimate_admissible(query: EstimateQuery, tol: float = DEFAULT_TOL) -> EstimateAnswer:
    """Conditions under which e^{t Lap} maps the source space to the target space."""
    (q1, r1, s1), (q2, r2, s2) = query.source, query.target
    if not compare(q2, 1, tol) > 0:
        raise ValueError("target q must exceed 1")
    x1, x2 = query.sums()
    bad = []
    if not (compare(0, x2, tol) <= 0 and compare(x2, x1, tol) <= 0 and compare(x1, 1, tol) <= 0):
        bad.append(SUM_ORDER)
    if compare(s2, s1, tol) > 0:
        bad.append(WEIGHT_ORDER)
    if (compare(x1, 1, tol) == 0 or compare(q1, 1, tol) == 0) and compare(r1, 1, tol) > 0:
        bad.append(SOURCE_ENDPOINT)
    if compare(x2, 0, tol) == 0 and not is_inf(r2):
        bad.append(TARGET_ENDPOINT)
    if compare(x1, x2, tol) == 0 and compare(r1, r2, tol) > 0:
        bad.append(EQUAL_SUM_R)
    if (is_inf(q1) and not is_inf(r1)) or (is_inf(q2) and not is_inf(r2)):
        bad.append(INFINITE_Q)
    return EstimateAnswer(not bad, decay_exponent(query), tuple(bad))


def meyer_admissible(query: EstimateQuery, tol: float = DEFAULT_TOL) -> EstimateAnswer:
    """Conditions for the time-uniform bound on the Duhamel integral into weak spaces."""
    (q1, r1, s1), (q2, _, s2) = query.source, query.target
    d = query.d
    if d < 3:
        raise ValueError("the Duhamel bound needs d >= 3")
    if is_inf(q2) or not q2 > 0:
        raise ValueError("target q must be finite and positive")
    x1, x2 = query.sums()
    bad = []
    if not (compare(0, x2, tol) < 0 and compare(x2, x1, tol) < 0 and compare(x1, 1, tol) <= 0):
        bad.append(STRICT_SUM_ORDER)
    if compare(s2, s1, tol) > 0:
        bad.append(WEIGHT_ORDER)
    gain = Fraction(d, 2) * (inv(q1) - inv(q2)) + (s1 - s2) / 2
    if compare(gain, 1, tol) != 0:
        bad.append(SCALING_BALANCE)
    if (compare(x1, 1, tol) == 0 or compare(q1, 1, tol) == 0) and compare(r1, 1, tol) > 0:
        bad.append(SOURCE_ENDPOINT)
    if is_inf(q1) and not is_inf(r1):
        bad.append(INFINITE_Q)
    # the bound is uniform in t, so the power of t is 1 - gain = 0 when admissible
    return EstimateAnswer(not bad, 1 - gain, tuple(bad))


@dataclass(frozen=True)
class SolverConstants:
    delta: object
    beta: object
    window: tuple  # open interval for 1/q_aux
    aux_inside: bool

    @property
    def window_empty(self) -> bool:
        lo, hi = self.window
        return not lo < hi


def solver_constants(p: ProblemParams, sp: SpaceParams, q_aux, tol: float = DEFAULT_TOL) -> SolverConstants:
    """Time-gain exponent, Kato weight, and the admissible auxiliary window."""
    d, a = p.d, p.alpha
    if d < 3:
        raise DomainError("the auxiliary window needs d >= 3")
    q_aux = exponent(q_aux)
    ce = critical_exponents(p, sp)
    x = sp.scaling_sum(d)
    delta = d * (a - 1) / 2 * (inv(ce.q_c) - x)
    beta = Fraction(d, 2) * (inv(sp.q) - inv(q_aux))
    q_star0 = Fraction(d, d - 2)
    lo = max(Fraction(0), inv(sp.q) - inv(q_star0), inv(sp.q) - 2 / (d * ce.alpha_star),
             key=as_float)
    hi = inv(sp.q)
    val = inv(q_aux)
    inside = compare(lo, val, tol) < 0 and compare(val, hi, tol) < 0
    return SolverConstants(delta, beta, (lo, hi), inside)
