"""One-parameter sweeps of the cycle, crossover search and CSV output."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .otto_cycle import (
    FIELD_DECREASE,
    CycleParams,
    classify,
    is_engine,
    run_cycle,
)
from .spin_model import DomainError

VARIABLES = ("J", "B1", "B2", "T1", "T2")

CSV_HEADER = (
    "var", "Q1", "Q2", "W", "eta", "eta0", "bound", "eta_carnot", "leak",
    "q1", "q2", "t1_local", "t2_local", "is_engine", "beats_uncoupled",
    "local_counterflow",
)


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """Uniform grid of ``steps`` points over [lo, hi] in one cycle parameter.

    ``fixed`` supplies the other four parameters; a value for the swept one,
    if present, is ignored.
    """

    fixed: Mapping[str, float]
    variable: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if isinstance(self.fixed, CycleParams):
            object.__setattr__(
                self, "fixed", {k: getattr(self.fixed, k) for k in VARIABLES}
            )
        if self.variable not in VARIABLES:
            raise SweepError(f"variable must be one of {VARIABLES}, got {self.variable!r}")
        missing = [k for k in VARIABLES if k != self.variable and k not in self.fixed]
        if missing:
            raise SweepError(f"missing fixed parameters: {', '.join(missing)}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise SweepError(f"need finite lo < hi, got lo={self.lo!r} hi={self.hi!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise SweepError(f"steps must be an integer >= 2, got {self.steps!r}")

    def grid(self) -> list[float]:
        return [float(x) for x in np.linspace(self.lo, self.hi, int(self.steps))]

    def params_at(self, value: float) -> CycleParams:
        values = {k: self.fixed[k] for k in VARIABLES if k != self.variable}
        values[self.variable] = value
        try:
            return CycleParams(**values)
        except DomainError as exc:
            raise SweepError(f"invalid grid point {self.variable}={value!r}: {exc}") from exc


@dataclass(frozen=True)
class SweepRow:
    var: float
    Q1: float
    Q2: float
    W: float
    eta: float | None
    eta0: float
    bound: float | None
    eta_carnot: float
    leak: float
    q1: float
    q2: float
    t1_local: float
    t2_local: float
    is_engine: bool
    beats_uncoupled: bool
    local_counterflow: bool
    bound_ok: bool
    carnot_ok: bool


def evaluate_row(value: float, params: CycleParams) -> SweepRow:
    r = run_cycle(params)
    rep = classify(params, r)
    return SweepRow(
        var=value, Q1=r.Q1, Q2=r.Q2, W=r.W, eta=r.eta, eta0=r.eta0, bound=r.bound,
        eta_carnot=r.eta_carnot, leak=r.leak, q1=r.q1, q2=r.q2,
        t1_local=r.t1_local, t2_local=r.t2_local,
        is_engine=rep.is_engine,
        beats_uncoupled=rep.beats_uncoupled,
        local_counterflow=rep.local_counterflow,
        bound_ok=rep.bound_ok,
        carnot_ok=rep.carnot_ok,
    )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    # validate the whole grid before evaluating anything
    points = [(v, spec.params_at(v)) for v in spec.grid()]
    return [evaluate_row(v, p) for v, p in points]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"{value:.17g}"


def format_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(getattr(row, k)) for k in CSV_HEADER])
    return buf.getvalue()


def write_csv(rows: list[SweepRow], path: str | os.PathLike) -> None:
    """Write atomically: a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".sweep-", suffix=".csv.tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(format_csv(rows))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# crossover coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Crossover:
    """Coupling at which the efficiency falls back to the uncoupled value.

    When ``found``, eta(lo) > eta0 >= eta(hi) and hi - lo < tol. Otherwise
    ``reason`` says why no crossing was located.
    """

    found: bool
    j_star: float | None = None
    lo: float | None = None
    hi: float | None = None
    reason: str = ""


def efficiency_excess(params: CycleParams, J: float) -> float:
    """eta(J) - eta0, with -inf where the cycle is not an engine."""
    p = params.replace(J=J)
    r = run_cycle(p)
    if not is_engine(r):
        return -math.inf
    return r.eta - r.eta0


def _scan_points(B1: float) -> list[float]:
    quarter = B1 / 4.0
    below = [quarter * 2.0 ** -k for k in range(40, 1, -1)]
    above = [quarter * (1.0 - 2.0 ** -k) for k in range(1, 41)]
    return below + above


def find_crossover(params: CycleParams, tol: float = 1e-9) -> Crossover:
    """Bisect eta(J) - eta0 on (0, B1/4); the J in ``params`` is ignored."""
    if params.case != FIELD_DECREASE:
        return Crossover(False, reason=f"{params.case} configuration; needs B1 > B2")
    if efficiency_excess(params, 0.0) == -math.inf:
        return Crossover(False, reason="not an engine at J = 0")

    # geometric ladder towards 0 and towards B1/4, ascending in J
    xs = _scan_points(params.B1)
    bracket = None
    prev_x, prev_g = None, None
    for x in xs:
        g = efficiency_excess(params, x)
        if prev_g is not None and prev_g > 0 and g <= 0:
            bracket = (prev_x, x)
            break
        prev_x, prev_g = x, g
    if bracket is None:
        return Crossover(False, reason="no sign change of eta - eta0 in (0, B1/4)")

    lo, hi = bracket
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if efficiency_excess(params, mid) > 0:
            lo = mid
        else:
            hi = mid
    return Crossover(True, j_star=0.5 * (lo + hi), lo=lo, hi=hi)
