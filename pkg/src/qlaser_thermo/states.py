"""Coherent, Poisson, Gibbs and vacuum states; entropies; work-source ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .linops import HilbertSpace, Operator

__all__ = [
    "LaserSpec",
    "TruncationError",
    "fock_space",
    "annihilation",
    "number_operator",
    "coherent_vector",
    "coherent_state",
    "poisson_weights",
    "poisson_tail_mass",
    "poisson_state",
    "gibbs_state",
    "displacement_operator",
    "von_neumann_entropy",
    "relative_entropy",
    "work_source_ratio",
]

EIG_SUPPORT_CUTOFF = 1e-12
PSD_ATOL = 1e-10


class TruncationError(ValueError):
    """Fock truncation too small for the requested amplitude."""


def required_nmax(amplitude: float) -> int:
    """Smallest truncation with Poisson tail mass below 1e-10."""
    return math.ceil(amplitude**2 + 10.0 * amplitude + 20.0)


@dataclass(frozen=True)
class LaserSpec:
    """Laser mode: amplitude |alpha|, phase (radians) and Fock truncation.

    With ``strict=True`` (the default) the truncation rule
    n_max >= ceil(|alpha|^2 + 10 |alpha| + 20) is enforced, which keeps the
    Poisson tail mass beyond n_max under 1e-10.  Benchmarks that deliberately
    run with tight truncations may opt out and monitor the tail themselves.
    """

    amplitude: float
    phase: float = 0.0
    n_max: int | None = None
    strict: bool = True

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        n_req = required_nmax(self.amplitude)
        if self.n_max is None:
            object.__setattr__(self, "n_max", n_req)
        elif self.strict and self.n_max < n_req:
            raise TruncationError(
                f"n_max={self.n_max} below required {n_req} for |alpha|={self.amplitude}"
            )

    @property
    def alpha(self) -> complex:
        return self.amplitude * np.exp(1j * self.phase)

    @property
    def dim(self) -> int:
        return self.n_max + 1


def fock_space(n_max: int, label: str = "L") -> HilbertSpace:
    return HilbertSpace.single(label, n_max + 1)


def annihilation(n_max: int) -> np.ndarray:
    a = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        a[n - 1, n] = math.sqrt(n)
    return a


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1.0)).astype(complex)


def coherent_vector(alpha: complex, n_max: int) -> np.ndarray:
    """Truncated coherent-state amplitudes e^{-|a|^2/2} a^N / sqrt(N!)."""
    n = np.arange(n_max + 1)
    # log-domain to stay finite for large alpha
    if alpha == 0:
        v = np.zeros(n_max + 1, dtype=complex)
        v[0] = 1.0
        return v
    logmag = -abs(alpha) ** 2 / 2.0 + n * np.log(abs(alpha)) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n]
    )
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(spec: LaserSpec, label: str = "L") -> Operator:
    """Rank-1 projector |alpha><alpha| on the truncated Fock space."""
    v = coherent_vector(spec.alpha, spec.n_max)
    if spec.strict and 1.0 - float(v.conj() @ v).real > 1e-10:
        raise TruncationError("coherent-state norm deficit exceeds 1e-10")
    return Operator(fock_space(spec.n_max, label), np.outer(v, v.conj()))


def poisson_weights(amplitude: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    if amplitude == 0:
        w = np.zeros(n_max + 1)
        w[0] = 1.0
        return w
    logw = -(amplitude**2) + 2.0 * n * np.log(amplitude) - np.array(
        [math.lgamma(k + 1) for k in n]
    )
    return np.exp(logw)


def poisson_tail_mass(amplitude: float, n_max: int) -> float:
    """Exact Poisson mass beyond n_max (oracle for the truncation rule)."""
    return float(1.0 - poisson_weights(amplitude, n_max).sum())


def poisson_state(amplitude: float, n_max: int, label: str = "L", strict: bool = True) -> Operator:
    """Fock-diagonal state with Poissonian weights; commutes with N exactly."""
    if strict and n_max < required_nmax(amplitude):
        raise TruncationError(
            f"n_max={n_max} below required {required_nmax(amplitude)} for |alpha|={amplitude}"
        )
    return Operator(fock_space(n_max, label), np.diag(poisson_weights(amplitude, n_max)).astype(complex))


def gibbs_state(H: Operator, beta: float) -> Operator:
    """e^{-beta H}/Z with the spectrum shifted before exponentiating."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if not H.is_hermitian():
        raise ValueError("Gibbs state needs a Hermitian Hamiltonian")
    w, P = la.eigh(H.data)
    x = np.exp(-beta * (w - w.min()))
    x /= x.sum()
    return Operator(H.space, (P * x) @ P.conj().T)


def displacement_operator(alpha: complex, n_max: int, label: str = "L") -> Operator:
    """D[alpha] = exp(alpha a^dag - alpha^* a) on the truncated Fock space."""
    a = annihilation(n_max)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return Operator(fock_space(n_max, label), la.expm(gen))


def _checked_spectrum(rho: Operator, psd_atol: float) -> np.ndarray:
    if not rho.is_hermitian(1e-8):
        raise ValueError("density matrix is not Hermitian")
    w = la.eigvalsh(rho.data)
    if w.min() < -psd_atol:
        raise ValueError(f"negative eigenvalue {w.min():.3e} beyond tolerance")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho: Operator, psd_atol: float = PSD_ATOL) -> float:
    """-sum p log p over eigenvalues, with 0 log 0 = 0."""
    w = _checked_spectrum(rho, psd_atol)
    w = w[w > 0]
    return float(-(w * np.log(w)).sum())


def relative_entropy(
    rho1: Operator,
    rho2: Operator,
    support_cutoff: float = EIG_SUPPORT_CUTOFF,
) -> float:
    """D(rho1 || rho2); +inf when supp rho1 is not contained in supp rho2."""
    w1 = _checked_spectrum(rho1, PSD_ATOL)
    w2, P2 = la.eigh(rho2.data)
    w2 = np.clip(w2, 0.0, None)
    inside = w2 > support_cutoff
    if not inside.all():
        # weight of rho1 outside the support of rho2
        proj = P2[:, ~inside]
        leak = float(np.real(np.trace(proj.conj().T @ rho1.data @ proj)))
        if leak > support_cutoff:
            return math.inf
    w1p = w1[w1 > 0]
    term1 = float((w1p * np.log(w1p)).sum())
    logw2 = np.where(inside, np.log(np.where(inside, w2, 1.0)), 0.0)
    log_rho2 = (P2 * logw2) @ P2.conj().T
    term2 = float(np.real(np.trace(rho1.data @ log_rho2)))
    return term1 - term2


def work_source_ratio(
    times: np.ndarray,
    laser_states: list[Operator],
    H_L: Operator,
    de_tol: float = 1e-12,
):
    """Pointwise Delta S_L / Delta E_L along a reduced-laser trajectory.

    Points where |Delta E_L| < de_tol are skipped and flagged invalid.
    Returns (times, ratio, valid) arrays; ratio is NaN at invalid points.
    """
    if len(times) != len(laser_states):
        raise ValueError("times and states length mismatch")
    s0 = von_neumann_entropy(laser_states[0])
    e0 = float(np.real(H_L.expect(laser_states[0])))
    ratio = np.full(len(times), np.nan)
    valid = np.zeros(len(times), dtype=bool)
    for i, rho in enumerate(laser_states):
        de = float(np.real(H_L.expect(rho))) - e0
        if abs(de) < de_tol:
            continue
        ds = von_neumann_entropy(rho) - s0
        ratio[i] = ds / de
        valid[i] = True
    return np.asarray(times, dtype=float), ratio, valid
