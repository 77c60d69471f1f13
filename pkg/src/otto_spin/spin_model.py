"""Two spin-1/2 isotropic Heisenberg dimer in a longitudinal field.

    H = J (s1.s2 + s2.s1) + B (sz1 + sz2)

Closed forms for the spectrum, Gibbs populations, single-spin reduced state and
local effective temperature, plus a brute-force matrix route (explicit 4x4
Hamiltonian, numerical diagonalisation, partial trace) used to cross-check
them.

Units: k_B = 1, energies and temperatures share one unit. Natural basis order is
(|11>, |10>, |01>, |00>), with sz|1> = +|1>.

Level labels follow the usual listing:

    1: singlet psi-      E = -6J
    2: |00>              E = 2J - 2B
    3: triplet psi+      E = 2J
    4: |11>              E = 2J + 2B
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

LN2 = math.log(2.0)


class DomainError(ValueError):
    """Parameter outside the physical domain of the model.

    ``param`` names the offending parameter when there is a single one.
    """

    def __init__(self, message: str, param: str | None = None):
        super().__init__(message)
        self.param = param


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}", name)
    return value


@dataclass(frozen=True)
class ModelPoint:
    J: float
    B: float
    T: float

    def __post_init__(self):
        J = _finite("J", self.J)
        B = _finite("B", self.B)
        T = _finite("T", self.T)
        if J < 0:
            raise DomainError(f"J must satisfy J >= 0 (antiferromagnetic), got {J!r}", "J")
        if B < 0:
            raise DomainError(f"B must satisfy B >= 0, got {B!r}", "B")
        if T <= 0:
            raise DomainError(f"T must satisfy T > 0, got {T!r}", "T")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "T", T)


@dataclass(frozen=True)
class Spectrum:
    e1: float
    e2: float
    e3: float
    e4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e1, self.e2, self.e3, self.e4)


@dataclass(frozen=True)
class LevelProbabilities:
    """Occupation of the four levels, in Spectrum order.

    ``logs`` holds the natural logs of the populations. thermal_probs fills it
    from the log-weights directly, so it stays finite (and accurate) where the
    linear values underflow to zero. Left as None it is derived from p1..p4 and
    the populations are validated; supplying it skips validation.
    """

    p1: float
    p2: float
    p3: float
    p4: float
    logs: tuple[float, float, float, float] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if self.logs is not None:
            return
        ps = self.as_tuple()
        for i, p in enumerate(ps, 1):
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"p{i} must lie in [0, 1], got {p!r}")
        if abs(math.fsum(ps) - 1.0) > 1e-12:
            raise DomainError(f"populations must sum to 1, got {math.fsum(ps)!r}")
        logs = tuple(math.log(p) if p > 0 else -math.inf for p in ps)
        object.__setattr__(self, "logs", logs)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.p3, self.p4)


@dataclass(frozen=True)
class SingleSpinState:
    """Diagonal reduced state of one spin in the local sz basis.

    diag_up is the population of sz = +1 (local energy +B), diag_down that of
    sz = -1 (local energy -B). The reduced state has no coherences.
    """

    diag_up: float
    diag_down: float

    def matrix(self) -> np.ndarray:
        return np.diag([self.diag_up, self.diag_down])


def spectrum(point: ModelPoint) -> Spectrum:
    J, B = point.J, point.B
    return Spectrum(-6.0 * J, 2.0 * J - 2.0 * B, 2.0 * J, 2.0 * J + 2.0 * B)


def _log_weights(J: float, B: float, T: float) -> tuple[float, float, float, float]:
    # -(E_i - 2J)/T; the common 2J shift cancels on normalisation
    return (8.0 * J / T, 2.0 * B / T, 0.0, -2.0 * B / T)


def thermal_probs(point: ModelPoint) -> LevelProbabilities:
    """Gibbs populations, max-shifted so that no exponent overflows."""
    return _thermal_probs(point.J, point.B, point.T)


def _thermal_probs(J: float, B: float, T: float) -> LevelProbabilities:
    a = _log_weights(J, B, T)
    m = max(a)
    w = [math.exp(x - m) for x in a]
    s = w[0] + w[1] + w[2] + w[3]
    log_z = m + math.log(s)
    return LevelProbabilities(
        w[0] / s, w[1] / s, w[2] / s, w[3] / s,
        logs=(a[0] - log_z, a[1] - log_z, a[2] - log_z, a[3] - log_z),
    )


# ---------------------------------------------------------------------------
# matrix route
# ---------------------------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

_SQRT_HALF = math.sqrt(0.5)
# analytic eigenvectors in the natural basis, Spectrum order
EIGENVECTORS = np.array(
    [
        [0.0, _SQRT_HALF, -_SQRT_HALF, 0.0],  # psi- = (|10> - |01>)/sqrt2
        [0.0, 0.0, 0.0, 1.0],                 # |00>
        [0.0, _SQRT_HALF, _SQRT_HALF, 0.0],   # psi+
        [1.0, 0.0, 0.0, 0.0],                 # |11>
    ]
)


def hamiltonian_matrix(J: float, B: float) -> np.ndarray:
    """Real 4x4 Hamiltonian in the natural basis, assembled from Pauli products."""
    exchange = sum(np.kron(s, s) for s in (_SX, _SY, _SZ))
    zeeman = np.kron(_SZ, _I2) + np.kron(_I2, _SZ)
    H = 2.0 * J * exchange + B * zeeman
    assert np.allclose(H.imag, 0.0)
    return H.real


def gibbs_state_oracle(point: ModelPoint, method: str = "eigh") -> np.ndarray:
    """exp(-H/T)/Z built numerically from the explicit Hamiltonian.

    method="eigh" diagonalises H; method="expm" uses a Pade matrix exponential
    after shifting H by a Gershgorin lower bound on its spectrum.
    """
    H = hamiltonian_matrix(point.J, point.B)
    if method == "eigh":
        evals, evecs = np.linalg.eigh(H)
        w = np.exp(-(evals - evals.min()) / point.T)
        rho = (evecs * (w / w.sum())) @ evecs.T
    elif method == "expm":
        lower = np.min(np.diag(H) - (np.abs(H).sum(axis=1) - np.abs(np.diag(H))))
        G = expm(-(H - lower * np.eye(4)) / point.T)
        rho = G / np.trace(G)
    else:
        raise ValueError(f"unknown method {method!r}")
    return 0.5 * (rho + rho.T)


def eigen_populations(rho: np.ndarray) -> np.ndarray:
    """<psi_i|rho|psi_i> for the four analytic eigenvectors, Spectrum order."""
    return np.einsum("ij,jk,ik->i", EIGENVECTORS, rho, EIGENVECTORS)


def partial_trace(rho: np.ndarray, keep: int = 0) -> np.ndarray:
    """Reduced 2x2 state of spin ``keep`` (0 or 1). Works on stacked (..., 4, 4) input."""
    r = np.asarray(rho).reshape(rho.shape[:-2] + (2, 2, 2, 2))
    if keep == 0:
        return np.einsum("...ajbj->...ab", r)
    if keep == 1:
        return np.einsum("...jajb->...ab", r)
    raise ValueError("keep must be 0 or 1")


def density_matrix(probs: LevelProbabilities) -> np.ndarray:
    """Two-spin state sum_i p_i |psi_i><psi_i| in the natural basis."""
    p = np.array(probs.as_tuple())
    return (EIGENVECTORS.T * p) @ EIGENVECTORS


# ---------------------------------------------------------------------------
# local description
# ---------------------------------------------------------------------------

def reduced_state(probs: LevelProbabilities) -> SingleSpinState:
    # p4 + (p1+p3)/2 == 1/2 - (p2-p4)/2 under normalisation, without the cancellation
    half_mixed = 0.5 * (probs.p1 + probs.p3)
    return SingleSpinState(probs.p4 + half_mixed, probs.p2 + half_mixed)


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def _softplus(x: float) -> float:
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _log_local_ratio(probs: LevelProbabilities) -> tuple[float, int]:
    """log(x) and sign(x) for x = log(diag_down / diag_up)."""
    l1, l2, l3, l4 = probs.logs
    if l2 == l4:
        raise DomainError("local temperature undefined for p2 == p4")
    sign = 1 if l2 > l4 else -1
    hi, lo = (l2, l4) if sign > 0 else (l4, l2)
    log_gap = hi + math.log(-math.expm1(lo - hi))
    log_mixed = _logaddexp(l1, l3) - LN2
    log_den = _logaddexp(lo, log_mixed)
    y = log_gap - log_den  # log((hi - lo) / den)
    if y < -30.0:
        log_x = y + math.log1p(-0.5 * math.exp(y))
    else:
        log_x = math.log(_softplus(y))
    return log_x, sign


def log_local_beta(B: float, probs: LevelProbabilities) -> float:
    """Natural log of the local inverse temperature of one spin (B > 0, p2 > p4).

    Comparisons of local temperatures go through this quantity: it stays finite
    where the temperature itself overflows.
    """
    B = _finite("B", B)
    if B <= 0:
        raise DomainError("local temperature undefined for B <= 0")
    log_x, sign = _log_local_ratio(probs)
    if sign < 0:
        raise DomainError("local temperature is negative for p2 < p4")
    return log_x - math.log(2.0 * B)


def local_temperature(B: float, probs: LevelProbabilities) -> float:
    """Effective temperature of one spin, 2B / log(2/(1 + p4 - p2) - 1).

    Returns math.inf when the true value exceeds the float range.
    """
    B = _finite("B", B)
    if B <= 0:
        raise DomainError("local temperature undefined for B <= 0")
    log_x, sign = _log_local_ratio(probs)
    log_t = math.log(2.0 * B) - log_x
    if log_t > 709.0:
        return sign * math.inf
    return sign * math.exp(log_t)
