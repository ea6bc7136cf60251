"""Bath spectral model, correlation spectra G+/G-, Floquet rates and regimes.

The flat model follows the amplitude convention Gamma(nu) = gamma0^2 inside
the band [center - width/2, center + width/2] and zero outside.  A density
convention Gamma(nu) = gamma0^2 / width is also available; steady-state
comparison scenarios use it because the amplitude reading of the published
strong-bath figures leaves no window between the bath rate and the qubit
frequency (see the regime margins reported by ``classify_regime``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "BathSpec",
    "RateTable",
    "RegimeReport",
    "bose_occupation",
    "g_plus",
    "g_minus",
    "rate_table",
    "classify_regime",
    "coarse_grain_time",
]

ZERO_FREQ_TOL = 1e-12


@dataclass(frozen=True)
class BathSpec:
    """Bath spectrum plus the discretized twin used by exact simulations.

    kind: 'flat' | 'tabulated' | 'smooth_window'
    """

    kind: str = "flat"
    width: float = 20.0
    gamma0: float = 0.1
    center: float | None = None  # band center; defaults to omega_A at build
    beta: float = 1.0
    gamma_convention: str = "amplitude"  # 'amplitude': G=g0^2, 'density': G=g0^2/width
    n_modes: int = 8
    g_bath: float = 0.1
    mode_n_max: int = 1  # per-mode Fock truncation (1 = vacuum + one photon)
    table: tuple[tuple[float, float], ...] | None = None  # (nu, Gamma) rows
    edge_fraction: float = 0.1  # smooth_window taper width as fraction of width
    mode_alignment: str = "midpoint"  # or 'resonant': one mode at the band center

    def with_center(self, center: float) -> "BathSpec":
        return replace(self, center=center)

    @property
    def band(self) -> tuple[float, float]:
        if self.center is None:
            raise ValueError("bath band center not set; call with_center(omega_a)")
        return (self.center - self.width / 2.0, self.center + self.width / 2.0)

    @property
    def flat_strength(self) -> float:
        if self.gamma_convention == "amplitude":
            return self.gamma0**2
        if self.gamma_convention == "density":
            return self.gamma0**2 / self.width
        raise ValueError(f"unknown gamma convention {self.gamma_convention!r}")

    def mode_frequencies(self) -> np.ndarray:
        """Uniform mode lattice over the band.

        'midpoint' places modes at the cell centers; 'resonant' shifts the
        same lattice so one mode sits exactly at the band center, which is
        how a coarse lattice best represents the continuum seen by a system
        tuned to that frequency.
        """
        lo, hi = self.band
        k = np.arange(self.n_modes)
        step = (hi - lo) / self.n_modes
        if self.mode_alignment == "midpoint":
            return lo + (k + 0.5) * step
        if self.mode_alignment == "resonant":
            center = (lo + hi) / 2.0
            return center + (k - (self.n_modes - 1) // 2) * step
        raise ValueError(f"unknown mode alignment {self.mode_alignment!r}")

    def effective_flat_strength(self) -> float:
        """Gamma equivalent of the discretized bath (golden-rule matched).

        With couplings V = (sigma+ + sigma-)(B + B^dag), B = sum_k (g_k/2) b_k
        and mode density n_modes/width, the Fermi golden rule decay rate is
        2 pi (g_bath/2)^2 n_modes/width, which is what Gamma means in the
        master-equation convention G+ = Gamma (n+1).
        """
        return 2.0 * math.pi * (self.g_bath / 2.0) ** 2 * self.n_modes / self.width

    @staticmethod
    def from_table(text: str, beta: float, center: float | None = None) -> "BathSpec":
        """Parse two-column numeric text (nu, Gamma) for the tabulated model."""
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            cols = line.replace(",", " ").split()
            if len(cols) != 2:
                raise ValueError(f"expected two columns, got {line!r}")
            rows.append((float(cols[0]), float(cols[1])))
        if len(rows) < 2:
            raise ValueError("tabulated spectrum needs at least two rows")
        rows.sort()
        if min(g for _, g in rows) < 0:
            raise ValueError("tabulated Gamma must be nonnegative")
        nus = [r[0] for r in rows]
        ctr = center if center is not None else 0.5 * (nus[0] + nus[-1])
        return BathSpec(
            kind="tabulated",
            width=nus[-1] - nus[0],
            center=ctr,
            beta=beta,
            table=tuple(rows),
        )


def spectral_density(spec: BathSpec, nu: float) -> float:
    """Zero-temperature spectral function Gamma(nu) >= 0."""
    if spec.kind == "flat":
        lo, hi = spec.band
        return spec.flat_strength if lo <= nu <= hi else 0.0
    if spec.kind == "smooth_window":
        lo, hi = spec.band
        w = spec.edge_fraction * spec.width
        if nu <= lo - w or nu >= hi + w:
            return 0.0
        s = spec.flat_strength
        if nu < lo + w:
            x = (nu - (lo - w)) / (2.0 * w)
            return s * 0.5 * (1.0 - math.cos(math.pi * min(max(x, 0.0), 1.0)))
        if nu > hi - w:
            x = ((hi + w) - nu) / (2.0 * w)
            return s * 0.5 * (1.0 - math.cos(math.pi * min(max(x, 0.0), 1.0)))
        return s
    if spec.kind == "tabulated":
        nus = np.array([r[0] for r in spec.table])
        gs = np.array([r[1] for r in spec.table])
        if nu < nus[0] or nu > nus[-1]:
            return 0.0
        return float(np.interp(nu, nus, gs))
    raise ValueError(f"unknown bath kind {spec.kind!r}")


def bose_occupation(beta: float, nu: float) -> float:
    """n_B(nu) = 1/(e^{beta nu} - 1); the nu -> 0 pole is the caller's concern."""
    x = beta * nu
    if abs(x) < 1e-8:
        # Laurent expansion around the pole keeps the product Gamma*n finite
        return 1.0 / x - 0.5 + x / 12.0 if x != 0 else math.inf
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def g_plus(spec: BathSpec, nu: float) -> float:
    """Emission spectrum G+(nu) = Gamma(nu) (n_B(nu) + 1)."""
    gam = spectral_density(spec, nu)
    if gam == 0.0:
        return 0.0
    if abs(nu) < ZERO_FREQ_TOL:
        warnings.warn("G+ evaluated at nu=0; using the Gamma/beta limit")
        return gam / spec.beta
    if spec.beta == math.inf:
        return gam if nu > 0 else 0.0
    return gam * (bose_occupation(spec.beta, nu) + 1.0)


def g_minus(spec: BathSpec, nu: float) -> float:
    """Absorption spectrum G-(nu) = Gamma(nu) n_B(nu)."""
    gam = spectral_density(spec, nu)
    if gam == 0.0:
        return 0.0
    if abs(nu) < ZERO_FREQ_TOL:
        warnings.warn("G- evaluated at nu=0; using the Gamma/beta limit")
        return gam / spec.beta
    if spec.beta == math.inf:
        return 0.0
    return gam * bose_occupation(spec.beta, nu)


@dataclass(frozen=True)
class RateTable:
    """Six Mollow-channel rates plus the flat references.

    Arrow convention: gamma_{j,down} is the bath-emission rate of channel j
    (weighted by G+ at that channel's frequency), gamma_{j,up} the absorption
    rate (G-).  This keeps the local detailed balance
    log(gamma_{j,down}/gamma_{j,up}) = beta (omega_L + l_j Omega) exact with
    l = (0, +1, -1).
    """

    g0_down: float
    g0_up: float
    g1_down: float
    g1_up: float
    g2_down: float
    g2_up: float
    gbar_plus: float
    gbar_minus: float
    gamma_max: float
    frequencies: tuple[float, float, float]  # (omega_L, omega_L+Omega, omega_L-Omega)

    def as_dict(self) -> dict:
        return {
            "g0_down": self.g0_down,
            "g0_up": self.g0_up,
            "g1_down": self.g1_down,
            "g1_up": self.g1_up,
            "g2_down": self.g2_down,
            "g2_up": self.g2_up,
        }


def rate_table(p) -> RateTable:
    """Channel rates from the model parameters (flat or tabulated bath)."""
    spec = p.bath_centered()
    wl, om, delta, g = p.omega_l, p.omega_rabi, p.delta, p.g
    freqs = (wl, wl + om, wl - om)
    lo, hi = spec.band
    for f in freqs:
        if not (lo <= f <= hi):
            warnings.warn(f"channel frequency {f:g} outside bath band [{lo:g}, {hi:g}]; rate is 0")
    a0 = g**2 / (4.0 * om**2)
    a1 = (om + delta) ** 2 / (4.0 * om**2)
    a2 = (om - delta) ** 2 / (4.0 * om**2)
    gp = [g_plus(spec, f) for f in freqs]
    gm = [g_minus(spec, f) for f in freqs]
    return RateTable(
        g0_down=a0 * gp[0],
        g0_up=a0 * gm[0],
        g1_down=a1 * gp[1],
        g1_up=a1 * gm[1],
        g2_down=a2 * gp[2],
        g2_up=a2 * gm[2],
        gbar_plus=g_plus(spec, p.omega_a),
        gbar_minus=g_minus(spec, p.omega_a),
        gamma_max=max(gp + gm),
        frequencies=freqs,
    )


@dataclass(frozen=True)
class RegimeReport:
    label: str  # 'weak' | 'intermediate' | 'common' | 'strong' | 'out-of-model'
    omega_rabi: float
    gamma_max: float
    drive_ratio: float  # Omega / gamma_max
    qubit_margin: float  # omega_A / gamma_max
    separation: float  # omega_A / Omega
    delta0_inv: float


# Desk thresholds chosen so that the published drive ratios 0.8, 8, 800 and
# 2000 land in weak / intermediate / common / strong respectively.
_WEAK_MAX = 1.0
_INTERMEDIATE_MAX = 50.0
_COMMON_SEPARATION = 2.0
# Out-of-model only when the bath rate swallows the qubit frequency entirely;
# the coarse-graining window omega_A >> 1/delta0 >> gamma_max then cannot exist.
_MODEL_MIN_QUBIT_MARGIN = 1.0


def classify_regime(p, rates: RateTable | None = None) -> RegimeReport:
    """Label the driving regime and report the inequality margins used."""
    rt = rates if rates is not None else rate_table(p)
    om, gmax = p.omega_rabi, rt.gamma_max
    ratio = om / gmax if gmax > 0 else math.inf
    qubit_margin = p.omega_a / gmax if gmax > 0 else math.inf
    separation = p.omega_a / om
    if qubit_margin < _MODEL_MIN_QUBIT_MARGIN and ratio < _INTERMEDIATE_MAX:
        label = "out-of-model"
    elif ratio <= _WEAK_MAX:
        label = "weak"
    elif ratio <= _INTERMEDIATE_MAX:
        label = "intermediate"
    elif separation > _COMMON_SEPARATION:
        label = "common"
    else:
        label = "strong"
    d0inv = _delta0_inv(p, label, gmax)
    return RegimeReport(
        label=label,
        omega_rabi=om,
        gamma_max=gmax,
        drive_ratio=ratio,
        qubit_margin=qubit_margin,
        separation=separation,
        delta0_inv=d0inv,
    )


def _delta0_inv(p, label: str, gamma_max: float) -> float:
    if label in ("strong", "common"):
        return math.sqrt(gamma_max * p.omega_rabi)
    return math.sqrt(p.omega_a * max(p.omega_rabi, gamma_max))


def coarse_grain_time(p, regime: RegimeReport | str | None = None) -> float:
    """Coarse-graining time delta0; 1/delta0 = sqrt(gamma_max Omega) at strong
    or common drive, sqrt(omega_A max(Omega, gamma_max)) otherwise."""
    if regime is None:
        regime = classify_regime(p)
    if isinstance(regime, str):
        label = regime
        gmax = rate_table(p).gamma_max
    else:
        label = regime.label
        gmax = regime.gamma_max
    return 1.0 / _delta0_inv(p, label, gmax)
