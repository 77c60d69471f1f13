"""Randomised invariant checks over the (J, B1, B2, T1, T2) parameter box.

Every invariant is evaluated at every sampled point and tallied as passed,
failed or not applicable. Tallies are plain counts plus the first failing point
in sample order, so the outcome does not depend on evaluation order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spin_model as sm
from .otto_cycle import (
    EPS,
    FIELD_DECREASE,
    FIELD_INCREASE,
    CycleParams,
    beats_uncoupled,
    bound_audit,
    is_engine,
    local_pwc,
    run_cycle,
    sign_link,
)

J_MAX = 5.0
B_MAX = 10.0
T1_MAX = 10.0
T2_RANGE = (0.05, 5.0)
UNCOUPLED_EVERY = 10  # every tenth sample is pinned to J = 0

INVARIANTS = (
    "normalization",
    "spectrum_identities",
    "oracle_probabilities",
    "oracle_partial_trace",
    "local_temperature_elevation",
    "local_temperature_uncoupled",
    "first_law",
    "locality",
    "second_law",
    "efficiency_bound",
    "appendix_audit",
    "sign_link",
    "field_increase_orderings",
    "field_increase_counterflow",
    "field_increase_local_efficiency",
    "local_pwc_field_decrease",
    "local_pwc_field_increase",
    "uncoupled_engine_criterion",
)


def sample_params(n: int, seed: int) -> list[CycleParams]:
    rng = np.random.default_rng(seed)
    u = rng.random((n, 5))
    J = J_MAX * u[:, 0]
    J[::UNCOUPLED_EVERY] = 0.0
    # 1 - u lies in (0, 1], giving half-open ranges that exclude the lower end
    B1 = B_MAX * (1.0 - u[:, 1])
    B2 = B_MAX * (1.0 - u[:, 2])
    T2 = T2_RANGE[0] + (T2_RANGE[1] - T2_RANGE[0]) * u[:, 3]
    T1 = T1_MAX - (T1_MAX - T2) * u[:, 4]
    return [
        CycleParams(float(a), float(b), float(c), float(d), float(e))
        for a, b, c, d, e in zip(J, B1, B2, T1, T2)
    ]


def _close(a: float, b: float, *scale: float, rtol: float = 1e-13, atol: float = 1e-15) -> bool:
    ref = max([abs(a), abs(b), *map(abs, scale)])
    return abs(a - b) <= rtol * ref + atol


def check_point(params: CycleParams) -> dict[str, bool | None]:
    """Scalar invariants at one point; None marks 'not applicable'."""
    return _check(params, run_cycle(params))


def _check(params: CycleParams, r) -> dict[str, bool | None]:
    out: dict[str, bool | None] = dict.fromkeys(INVARIANTS)
    hot, cold = r.hot, r.cold
    J = params.J

    out["normalization"] = all(
        abs(math.fsum(p.as_tuple()) - 1.0) <= 1e-14 for p in (hot, cold)
    )
    ok = True
    for B in (params.B1, params.B2):
        s = sm.spectrum(sm.ModelPoint(J, B, 1.0))
        ok &= _close(s.e4 - s.e2, 4.0 * B, s.e4, s.e2, rtol=4e-16, atol=0.0)
        ok &= _close(s.e3 - s.e1, 8.0 * J, s.e3, s.e1, rtol=4e-16, atol=0.0)
    out["spectrum_identities"] = ok

    if J > 0:
        out["local_temperature_elevation"] = r.t1_local > params.T1 and r.t2_local > params.T2
    else:
        out["local_temperature_uncoupled"] = (
            abs(r.t1_local - params.T1) <= 1e-10 and abs(r.t2_local - params.T2) <= 1e-10
        )

    out["first_law"] = _close(r.W, r.Q1 + r.Q2, r.Q1, r.Q2)
    out["locality"] = (
        _close(r.W, 2.0 * r.w, r.q1, r.q2)
        and _close(r.Q1, r.leak + 2.0 * r.q1, r.leak, r.q1)
        and _close(r.Q2, -r.leak + 2.0 * r.q2, r.leak, r.q2)
    )

    engine = is_engine(r)
    case = params.case
    if engine:
        out["second_law"] = r.eta < r.eta_carnot

    if beats_uncoupled(params, r):
        audit = bound_audit(params, r)
        out["appendix_audit"] = audit.ok
        out["efficiency_bound"] = (
            r.bound is not None
            and audit.links["eta<bound"]
            and r.bound < r.eta_carnot
        )

    if engine and case == FIELD_DECREASE:
        link = sign_link(params, r)
        if J > 0:
            out["sign_link"] = link.consistent
        decrease_pwc, hotter = local_pwc(params, r)
        out["local_pwc_field_decrease"] = decrease_pwc and hotter

    if engine and case == FIELD_INCREASE:
        lh, lc = hot.logs, cold.logs
        out["field_increase_orderings"] = (
            lh[3] > lc[3] and lh[2] > lc[2] and lh[1] > lc[1] and lc[0] > lh[0]
        )
        out["field_increase_counterflow"] = r.q1 < 0.0 and r.q2 > 0.0
        out["field_increase_local_efficiency"] = (
            r.eta_local is not None
            and abs(r.eta_local - (1.0 - params.B1 / params.B2)) <= 1e-12
        )
        decrease_pwc, hotter = local_pwc(params, r)
        # B1/T1' > B2/T2' is the strict negation of B2/T2' > B1/T1' away from ties
        increase_pwc = not decrease_pwc
        out["local_pwc_field_increase"] = increase_pwc and not hotter

    # outside the eps band the float classification is decisive
    decisive = min(abs(r.W), abs(r.Q1), abs(r.Q2)) > EPS
    if J == 0 and decisive:
        expected = params.B1 > params.B2 and params.B2 / params.T2 > params.B1 / params.T1
        out["uncoupled_engine_criterion"] = engine == expected
    return out


def _closed_forms(points) -> tuple[np.ndarray, np.ndarray]:
    closed = []
    reduced = []
    for pr in points:
        closed.append(pr.as_tuple())
        rs = sm.reduced_state(pr)
        reduced.append((rs.diag_up, rs.diag_down))
    return np.array(closed).reshape(-1, 4), np.array(reduced).reshape(-1, 2)


def oracle_checks(
    params: list[CycleParams],
    closed: np.ndarray | None = None,
    reduced: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched matrix-route cross-checks; returns per-point pass masks.

    The first mask compares closed-form populations with eigenbasis populations
    of the numerically diagonalised Gibbs state (1e-10); the second compares
    reduced_state with numerical partial traces over either spin (1e-12).
    ``closed`` and ``reduced`` hold thermal_probs and reduced_state output for
    the hot stages followed by the cold stages; computed here when omitted.
    """
    n = len(params)
    if n == 0:
        return np.zeros(0, bool), np.zeros(0, bool)
    J = np.array([p.J for p in params] * 2)
    B = np.array([p.B1 for p in params] + [p.B2 for p in params])
    T = np.array([p.T1 for p in params] + [p.T2 for p in params])

    H = np.zeros((2 * n, 4, 4))
    H[:, 0, 0] = 2 * J + 2 * B
    H[:, 1, 1] = H[:, 2, 2] = -2 * J
    H[:, 3, 3] = 2 * J - 2 * B
    H[:, 1, 2] = H[:, 2, 1] = 4 * J
    evals, evecs = np.linalg.eigh(H)
    w = np.exp(-(evals - evals[:, :1]) / T[:, None])
    w /= w.sum(axis=1, keepdims=True)
    rho = np.einsum("nij,nj,nkj->nik", evecs, w, evecs)
    pops = np.einsum("ij,njk,ik->ni", sm.EIGENVECTORS, rho, sm.EIGENVECTORS)

    if closed is None or reduced is None:
        closed, reduced = _closed_forms(
            sm.thermal_probs(sm.ModelPoint(float(j), float(b), float(t)))
            for j, b, t in zip(J, B, T)
        )

    prob_ok = np.all(np.abs(pops - closed) <= 1e-10, axis=1)
    trace_ok = np.ones(2 * n, bool)
    for keep in (0, 1):
        pt = sm.partial_trace(rho, keep)
        diag_ok = np.all(np.abs(np.stack([pt[:, 0, 0], pt[:, 1, 1]], 1) - reduced) <= 1e-12, axis=1)
        trace_ok &= diag_ok & (np.abs(pt[:, 0, 1]) <= 1e-12)
    return prob_ok[:n] & prob_ok[n:], trace_ok[:n] & trace_ok[n:]


@dataclass
class Tally:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_failure: int | None = None  # sample index


@dataclass
class VerifyReport:
    samples: int
    seed: int
    tallies: dict[str, Tally]
    params: list[CycleParams] = field(repr=False)
    field_increase_witness: CycleParams | None = None

    @property
    def ok(self) -> bool:
        return (
            all(t.failed == 0 for t in self.tallies.values())
            and self.field_increase_witness is not None
        )

    def failures(self) -> list[tuple[str, CycleParams]]:
        return [
            (name, self.params[t.first_failure])
            for name, t in self.tallies.items()
            if t.first_failure is not None
        ]

    def lines(self) -> list[str]:
        out = [f"seed={self.seed} samples={self.samples}"]
        width = max(map(len, self.tallies))
        for name, t in self.tallies.items():
            status = "PASS" if t.failed == 0 else "FAIL"
            out.append(
                f"{status} {name:<{width}}  passed={t.passed} failed={t.failed} n/a={t.skipped}"
            )
        w = self.field_increase_witness
        if w is None:
            out.append("FAIL field_increase_engine_exists  no witness found")
        else:
            out.append(f"PASS field_increase_engine_exists  witness={format_params(w)}")
        for name, p in self.failures():
            out.append(f"first violation of {name}: {format_params(p)}")
        return out


def format_params(p: CycleParams) -> str:
    return f"J={p.J!r} B1={p.B1!r} B2={p.B2!r} T1={p.T1!r} T2={p.T2!r}"


def find_field_increase_engine(seed: int = 0, tries: int = 100_000) -> CycleParams | None:
    """Seeded random search for B2 > B1 with W > 0, Q1 > 0, Q2 < 0."""
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        J, B1, B2, T2, frac = rng.random(5)
        J = 2.0 * (1.0 - J)
        B1, B2 = sorted((B_MAX * (1.0 - B1), B_MAX * (1.0 - B2)))
        if B1 == B2:
            continue
        T2 = T2_RANGE[0] + (T2_RANGE[1] - T2_RANGE[0]) * T2
        T1 = T1_MAX - (T1_MAX - T2) * frac
        p = CycleParams(J, B1, B2, T1, T2)
        if is_engine(run_cycle(p)):
            return p
    return None


def _check_chunk(chunk: list[CycleParams]):
    outcomes, hot, cold = [], [], []
    for p in chunk:
        r = run_cycle(p)
        outcomes.append(_check(p, r))
        hot.append(r.hot)
        cold.append(r.cold)
    return outcomes, hot, cold


def _threads() -> int:
    env = os.environ.get("OTTO_SPIN_THREADS")
    limit = os.cpu_count() or 1
    if env:
        try:
            limit = min(limit, max(1, int(env)))
        except ValueError:
            pass
    return limit


def run_verify(samples: int, seed: int = 0, threads: int | None = None) -> VerifyReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    params = sample_params(samples, seed)
    threads = threads or _threads()

    if threads > 1 and samples >= 10_000:
        size = -(-samples // threads)
        chunks = [params[i:i + size] for i in range(0, samples, size)]
        with ProcessPoolExecutor(threads) as pool:
            parts = list(pool.map(_check_chunk, chunks))
        results = [r for part in parts for r in part[0]]
        hot = [h for part in parts for h in part[1]]
        cold = [c for part in parts for c in part[2]]
    else:
        results, hot, cold = _check_chunk(params)

    closed, reduced = _closed_forms(hot + cold)
    prob_ok, trace_ok = oracle_checks(params, closed, reduced)
    for res, a, b in zip(results, prob_ok, trace_ok):
        res["oracle_probabilities"] = bool(a)
        res["oracle_partial_trace"] = bool(b)

    tallies = {name: Tally() for name in INVARIANTS}
    for i, res in enumerate(results):
        for name, outcome in res.items():
            t = tallies[name]
            if outcome is None:
                t.skipped += 1
            elif outcome:
                t.passed += 1
            else:
                t.failed += 1
                if t.first_failure is None:
                    t.first_failure = i

    return VerifyReport(
        samples=samples,
        seed=seed,
        tallies=tallies,
        params=params,
        field_increase_witness=find_field_increase_engine(seed),
    )
