"""Four-stroke quantum Otto cycle on the Heisenberg dimer.

Stage 1: thermalise at (B1, T1). Stage 2: adiabatic field change B1 -> B2 at
frozen populations. Stage 3: thermalise at (B2, T2). Stage 4: adiabatic
B2 -> B1. Heat is positive when absorbed by the working medium, work positive
when delivered by it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath

from .spin_model import (
    DomainError,
    LevelProbabilities,
    _finite,
    _thermal_probs,
    local_temperature,
    log_local_beta,
)

EPS = 1e-12

FIELD_DECREASE = "field-decrease"
FIELD_INCREASE = "field-increase"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CycleParams:
    J: float
    B1: float
    B2: float
    T1: float
    T2: float

    def __post_init__(self):
        vals = {k: _finite(k, getattr(self, k)) for k in ("J", "B1", "B2", "T1", "T2")}
        if vals["J"] < 0:
            raise DomainError(f"J must satisfy J >= 0 (antiferromagnetic), got {vals['J']!r}", "J")
        for k in ("B1", "B2"):
            if vals[k] <= 0:
                raise DomainError(f"{k} must satisfy {k} > 0, got {vals[k]!r}", k)
        if vals["T2"] <= 0:
            raise DomainError(f"T2 must satisfy T2 > 0, got {vals['T2']!r}", "T2")
        if vals["T1"] <= vals["T2"]:
            raise DomainError(
                f"T1 must satisfy T1 > T2, got T1={vals['T1']!r}, T2={vals['T2']!r}", "T1"
            )
        for k, v in vals.items():
            object.__setattr__(self, k, v)

    @property
    def case(self) -> str:
        if self.B1 > self.B2:
            return FIELD_DECREASE
        if self.B2 > self.B1:
            return FIELD_INCREASE
        return DEGENERATE

    def replace(self, **changes) -> "CycleParams":
        values = {k: getattr(self, k) for k in ("J", "B1", "B2", "T1", "T2")}
        values.update(changes)
        return CycleParams(**values)


@dataclass(frozen=True)
class CycleResult:
    """Energetics of one cycle. Optional floats are None where undefined."""

    Q1: float
    Q2: float
    W: float
    q1: float
    q2: float
    w: float
    leak: float
    eta: float | None
    eta_local: float | None
    eta0: float
    eta_carnot: float
    bound: float | None
    t1_local: float
    t2_local: float
    hot: LevelProbabilities = field(repr=False)
    cold: LevelProbabilities = field(repr=False)


@dataclass(frozen=True)
class RegimeReport:
    is_engine: bool
    case_label: str
    beats_uncoupled: bool
    local_counterflow: bool
    bound_ok: bool
    carnot_ok: bool
    pwc_condition: bool
    appendix_ok: bool


@dataclass(frozen=True)
class BoundAudit:
    """Each link of the efficiency-bound argument, evaluated separately.

    ``links`` maps link name to outcome; empty when the audit does not apply
    (not a field-decrease engine, or efficiency not above the uncoupled one).
    """

    applicable: bool
    links: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.links.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.links.items() if not v]


def efficiency_bound(params: CycleParams) -> float | None:
    """(1 - B2/B1) / (1 - 4J/B1), or None when B1 <= 4J."""
    if params.B1 <= 4.0 * params.J:
        return None
    return (1.0 - params.B2 / params.B1) / (1.0 - 4.0 * params.J / params.B1)


def run_cycle(params: CycleParams) -> CycleResult:
    J, B1, B2 = params.J, params.B1, params.B2
    # params are validated on construction
    hot = _thermal_probs(J, B1, params.T1)
    cold = _thermal_probs(J, B2, params.T2)

    # change in local polarisation, p2' - p2 + p4 - p4'
    d = (cold.p2 - hot.p2) + (hot.p4 - cold.p4)
    leak = 8.0 * J * (cold.p1 - hot.p1) + 0.0  # no -0.0 at J = 0
    Q1 = leak + 2.0 * B1 * d
    Q2 = -leak - 2.0 * B2 * d
    W = 2.0 * (B1 - B2) * d
    q1 = B1 * d
    q2 = -B2 * d
    w = q1 + q2

    eta = W / Q1 if Q1 > EPS else None
    eta_local = None
    if params.case == FIELD_DECREASE and q1 != 0.0:
        eta_local = w / q1
    elif params.case == FIELD_INCREASE and q2 != 0.0:
        eta_local = w / q2

    return CycleResult(
        Q1=Q1, Q2=Q2, W=W, q1=q1, q2=q2, w=w, leak=leak,
        eta=eta,
        eta_local=eta_local,
        eta0=1.0 - B2 / B1,
        eta_carnot=1.0 - params.T2 / params.T1,
        bound=efficiency_bound(params),
        t1_local=local_temperature(B1, hot),
        t2_local=local_temperature(B2, cold),
        hot=hot,
        cold=cold,
    )


def is_engine(result: CycleResult) -> bool:
    return result.W > EPS and result.Q1 > EPS and result.Q2 < -EPS


def beats_uncoupled(params: CycleParams, result: CycleResult) -> bool:
    return (
        params.case == FIELD_DECREASE
        and is_engine(result)
        and result.eta > result.eta0 + EPS
    )


# ---------------------------------------------------------------------------
# bound audit
# ---------------------------------------------------------------------------

def _mp_probs(J, B, T):
    a = [8 * J / T, 2 * B / T, mpmath.mpf(0), -2 * B / T]
    m = max(a)
    w = [mpmath.exp(x - m) for x in a]
    s = sum(w)
    return [x / s for x in w]


def _gap_and_margin(params: CycleParams, result: CycleResult) -> tuple[float, float]:
    """Signs of (p4 - p4' + p2' - p2) - (p1 - p1') and of bound - eta.

    Both are differences of nearly equal quantities when levels 3 and 4 are
    almost empty, and eta itself loses accuracy when Q1 is small against the
    terms it is summed from. Whenever a float margin is within a generous
    multiple of its rounding error the signs are recomputed in extended
    precision, with enough digits to resolve the smallest Boltzmann factor.
    """
    hot, cold = result.hot, result.cold
    gap = (hot.p4 - cold.p4 + cold.p2 - hot.p2) - (hot.p1 - cold.p1)
    margin = result.bound - result.eta
    terms = 8.0 * params.J + 2.0 * params.B1 + abs(result.leak)
    eta_err = 1e-15 * terms / result.Q1 * (1.0 + abs(result.eta))
    if abs(gap) > 1e-9 and abs(margin) > max(1e-9, 1e3 * eta_err):
        return gap, margin

    top = max(8 * params.J, 2 * params.B1, 2 * params.B2) / params.T2
    with mpmath.workdps(40 + int(2 * top / math.log(10))):
        J, B1, B2, T1, T2 = (mpmath.mpf(getattr(params, k)) for k in ("J", "B1", "B2", "T1", "T2"))
        p = _mp_probs(J, B1, T1)
        pc = _mp_probs(J, B2, T2)
        d = pc[1] - p[1] + p[3] - pc[3]
        gap_mp = d - (p[0] - pc[0])
        eta_mp = 2 * (B1 - B2) * d / (8 * J * (pc[0] - p[0]) + 2 * B1 * d)
        bound_mp = (1 - B2 / B1) / (1 - 4 * J / B1)
        return float(mpmath.sign(gap_mp)), float(mpmath.sign(bound_mp - eta_mp))


def bound_audit(params: CycleParams, result: CycleResult) -> BoundAudit:
    if not beats_uncoupled(params, result):
        return BoundAudit(applicable=False)

    J, B1, B2, T1, T2 = params.J, params.B1, params.B2, params.T1, params.T2
    l_hot, l_cold = result.hot.logs, result.cold.logs
    links = {
        "p1>p1'": l_hot[0] > l_cold[0],
        "p3>p3'": l_hot[2] > l_cold[2],
        "p4>p4'": l_hot[3] > l_cold[3],
        "p2'>p2": l_cold[1] > l_hot[1],
        "p2'/p1'>p2/p1": l_cold[1] - l_cold[0] > l_hot[1] - l_hot[0],
        "exp_levels": (B2 - 4.0 * J) / T2 > (B1 - 4.0 * J) / T1,
        "B1>4J": B1 > 4.0 * J,
        "B2>4J": B2 > 4.0 * J,
    }
    if result.bound is None:
        links["population_gap"] = False
        links["eta<bound"] = False
        links["bound<carnot"] = False
        return BoundAudit(applicable=True, links=links)

    gap, margin = _gap_and_margin(params, result)
    links["population_gap"] = gap > 0
    links["eta<bound"] = margin > 0
    links["bound<carnot"] = result.bound < result.eta_carnot
    return BoundAudit(applicable=True, links=links)


@dataclass(frozen=True)
class SignLink:
    """sign(eta0 - eta) against sign(p1' - p1); zero means within EPS / equal."""

    eta_sign: int
    population_sign: int

    @property
    def consistent(self) -> bool:
        return self.eta_sign == 0 or self.eta_sign == self.population_sign

    @property
    def sign(self) -> int:
        return self.eta_sign


def _sign(x: float, tol: float = 0.0) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def sign_link(params: CycleParams, result: CycleResult | None = None) -> SignLink | None:
    """Relation 8J(p1' - p1) = Q1 (1 - eta/eta0) read as a sign identity.

    None outside its domain: field-decrease engine with J > 0.
    """
    if result is None:
        result = run_cycle(params)
    if params.case != FIELD_DECREASE or not is_engine(result):
        return None
    pop = _sign(result.cold.p1 - result.hot.p1)
    if params.J == 0:
        return SignLink(0, pop)
    return SignLink(_sign(result.eta0 - result.eta, EPS), pop)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def local_pwc(params: CycleParams, result: CycleResult) -> tuple[bool, bool]:
    """(B2/T2' > B1/T1', T1' > T2'), compared through log inverse temperatures."""
    lb1 = log_local_beta(params.B1, result.hot)
    lb2 = log_local_beta(params.B2, result.cold)
    return (
        math.log(params.B2) + lb2 > math.log(params.B1) + lb1,
        lb2 > lb1,
    )


def classify(params: CycleParams, result: CycleResult) -> RegimeReport:
    engine = is_engine(result)
    case = params.case
    counterflow = result.q1 < -EPS and result.q2 > EPS

    carnot_ok = True
    if engine:
        carnot_ok = result.eta < result.eta_carnot

    beats = beats_uncoupled(params, result)
    audit = bound_audit(params, result)
    bound_ok = True
    if beats:
        bound_ok = audit.links.get("eta<bound", False)

    return RegimeReport(
        is_engine=engine,
        case_label=case,
        beats_uncoupled=beats,
        local_counterflow=counterflow,
        bound_ok=bound_ok,
        carnot_ok=carnot_ok,
        pwc_condition=params.B2 / params.T2 > params.B1 / params.T1,
        appendix_ok=audit.ok,
    )
