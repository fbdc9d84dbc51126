"""Momentum-space theory of the uniform-flux ladder.

With the Fourier convention ``a_k = sum_j exp(ikj) a_j / sqrt(N)`` and the
symmetric gauge of :func:`fluxladder.couplings.uniform_couplings`, the
single-particle Bloch Hamiltonian is

    h(k) = eps0(k) + t0 sigma_x + eps_z(k) sigma_z,
    eps0 = 2 t0 cos(phi/2) cos k,   eps_z = 2 t0 sin(phi/2) sin k.

A Bloch state ``(alpha a_Ak^dag + beta a_Bk^dag)|0>`` has real-space
amplitude ``alpha exp(-ikj) / sqrt(N)`` on site ``(A, j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._validation import check_finite, check_int, leg_index
from .errors import DomainError, InvalidArgumentError
from .lattice import wrap_phase

__all__ = [
    "BlochParams",
    "BandPoint",
    "bloch_components",
    "bloch_matrix",
    "band_energies",
    "critical_flux",
    "kramers_q",
    "lower_band_minima",
    "band_eigenvector",
    "band_point",
    "sigma_z_expect",
    "momentum_grid",
    "bloch_state",
    "LocalizedDecomposition",
    "localized_vector",
    "decompose_localized",
]

_SCAN_POINTS = 2048


@dataclass(frozen=True)
class BlochParams:
    t0: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        check_finite(self.t0, "t0")
        check_finite(self.phi, "phi")


@dataclass(frozen=True)
class BandPoint:
    k: float
    e_lower: float
    e_upper: float
    lower: tuple
    upper: tuple
    sz: float


def bloch_components(p, k):
    """Return ``(eps0, eps_z)`` at momentum ``k`` (scalar or array)."""
    k = np.asarray(k, dtype=float)
    eps0 = 2 * p.t0 * np.cos(p.phi / 2) * np.cos(k)
    epsz = 2 * p.t0 * np.sin(p.phi / 2) * np.sin(k)
    return eps0, epsz


def bloch_matrix(p, k):
    """The 2x2 Bloch Hamiltonian in the ``(A, B)`` basis."""
    eps0, epsz = bloch_components(p, float(k))
    return np.array([[eps0 + epsz, p.t0], [p.t0, eps0 - epsz]], dtype=float)


def band_energies(p, k):
    """Lower and upper band energies ``eps0 -+ sqrt(eps_z**2 + t0**2)``."""
    eps0, epsz = bloch_components(p, k)
    r = np.hypot(epsz, p.t0)
    return eps0 - r, eps0 + r


def critical_flux():
    """Flux at which the lower band minimum splits in two: ``2 arccos(sqrt(17)/4 - 1/4)``."""
    return 2.0 * math.acos(math.sqrt(17.0) / 4.0 - 0.25)


def kramers_q(phi):
    """Degeneracy-point parameter ``q`` of the two-minimum regime.

    ``q = arccos[(1 + cos phi) / (2 (1 - cos phi)) + cos phi] / 2`` is real
    only for ``phi_c < |phi| <= pi``.  The lower-band minima themselves sit
    at ``k = +-(pi - q)``; both points carry the same eigenvector
    coefficients since ``sin(pi - q) = sin q``.
    """
    phi = check_finite(phi, "phi")
    c = math.cos(phi)
    if not critical_flux() < abs(phi) <= math.pi:
        raise DomainError(f"q is defined only for phi_c < |phi| <= pi, got phi={phi}")
    arg = (1 + c) / (2 * (1 - c)) + c
    return 0.5 * math.acos(max(-1.0, min(1.0, arg)))


def _lower_slope(p, k):
    eps0, epsz = bloch_components(p, k)
    d0 = -2 * p.t0 * math.cos(p.phi / 2) * math.sin(k)
    dz = 2 * p.t0 * math.sin(p.phi / 2) * math.cos(k)
    return d0 - epsz * dz / math.hypot(epsz, p.t0)


def _numeric_minima(p):
    # dense scan of dE/dk on (0, pi) plus root polishing; E is even in k
    grid = np.linspace(0.0, np.pi, _SCAN_POINTS + 1)[1:-1]
    slopes = np.array([_lower_slope(p, k) for k in grid])
    candidates = [math.pi, 0.0]
    for i in np.nonzero((slopes[:-1] < 0) & (slopes[1:] >= 0))[0]:
        candidates.append(brentq(lambda k: _lower_slope(p, k), grid[i], grid[i + 1], xtol=1e-15))
    energies = [float(band_energies(p, k)[0]) for k in candidates]
    best = int(np.argmin(energies))
    k = candidates[best]
    if k in (0.0, math.pi):
        return [k]
    return [-k, k]


def lower_band_minima(p, method="closed"):
    """Momenta of the lower-band minima in (-pi, pi].

    Below the critical flux the single minimum is at ``k = pi``; above it
    the Kramers pair ``+-(pi - q)`` is returned, smaller momentum first.
    ``method="numeric"`` locates the minima without using the closed form.
    """
    if method == "numeric":
        return _numeric_minima(p)
    if method != "closed":
        raise InvalidArgumentError(f"method must be 'closed' or 'numeric', got {method!r}")
    phi = abs(wrap_phase(p.phi))
    if p.t0 <= 0:
        raise DomainError("closed-form minima assume t0 > 0")
    if phi <= critical_flux():
        return [math.pi]
    k = math.pi - kramers_q(phi)
    return [-k, k]


def band_eigenvector(p, k, band="lower"):
    """Real eigenvector ``(alpha, beta)`` of the requested band.

    Lower band: ``alpha = (e - r) / D``, ``beta = 1 / D`` with
    ``e = eps_z / t0``, ``r = sqrt(1 + e**2)``, ``D = sqrt((e - r)**2 + 1)``.
    Upper band: ``(beta_L, -alpha_L)``.
    """
    _, epsz = bloch_components(p, k)
    e = epsz / p.t0
    r = np.sqrt(1 + e * e)
    # (e - r) loses precision for large positive e; use -1/(e + r) instead
    m = np.where(e > 0, -1.0 / (e + r), e - r)
    d = np.sqrt(m * m + 1)
    alpha, beta = m / d, 1.0 / d
    if band == "lower":
        return alpha, beta
    if band == "upper":
        return beta, -alpha
    raise InvalidArgumentError(f"band must be 'lower' or 'upper', got {band!r}")


def sigma_z_expect(p, k):
    """Leg polarisation ``|alpha|^2 - |beta|^2`` of the lower band at ``k``."""
    alpha, beta = band_eigenvector(p, k, "lower")
    return alpha * alpha - beta * beta


def band_point(p, k):
    lo, up = band_energies(p, k)
    return BandPoint(
        float(k), float(lo), float(up),
        tuple(float(x) for x in band_eigenvector(p, k, "lower")),
        tuple(float(x) for x in band_eigenvector(p, k, "upper")),
        float(sigma_z_expect(p, k)),
    )


def momentum_grid(n_rungs):
    """Allowed momenta ``2 pi m / N`` in ``(-pi, pi]``, ``m = -ceil(N/2)+1 .. floor(N/2)``."""
    n = check_int(n_rungs, "N", low=1)
    m = np.arange(n) - (n - 1) // 2
    return 2 * np.pi * m / n


def bloch_state(p, n_rungs, k, band="lower"):
    """Single-particle real-space vector (length ``2N``) of a Bloch eigenstate."""
    alpha, beta = band_eigenvector(p, k, band)
    j = np.arange(1, n_rungs + 1)
    wave = np.exp(-1j * k * j) / np.sqrt(n_rungs)
    return np.concatenate([alpha * wave, beta * wave])


@dataclass(frozen=True, eq=False)
class LocalizedDecomposition:
    """Amplitudes of a localized state on the Bloch basis of both bands."""

    k: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    params: BlochParams

    @property
    def upper_weight(self):
        return float(np.sum(np.abs(self.upper) ** 2))

    @property
    def lower_weight(self):
        return float(np.sum(np.abs(self.lower) ** 2))

    def reconstruct(self):
        """Real-space single-particle vector rebuilt from the band amplitudes."""
        n = self.k.size
        out = np.zeros(2 * n, dtype=complex)
        for k, cu, cl in zip(self.k, self.upper, self.lower):
            out += cu * bloch_state(self.params, n, k, "upper") + cl * bloch_state(self.params, n, k, "lower")
        return out


_LOCALIZED = {
    "symmetric": ((0, 1.0), (1, 1.0)),
    "antisymmetric": ((0, 1.0), (1, -1.0)),
}


def localized_vector(kind, j0, n_rungs):
    """Real-space vector of ``(a_A + a_B)``, ``(a_A - a_B)`` (normalized) or a single site."""
    n = check_int(n_rungs, "N", low=1)
    j0 = check_int(j0, "j0", low=1, high=n)
    v = np.zeros(2 * n, dtype=complex)
    if kind in _LOCALIZED:
        for leg, amp in _LOCALIZED[kind]:
            v[leg * n + j0 - 1] = amp / np.sqrt(2)
    elif kind.startswith("single-site"):
        leg = leg_index(kind.rsplit("-", 1)[-1]) if kind != "single-site" else 1
        v[leg * n + j0 - 1] = 1.0
    else:
        raise InvalidArgumentError(f"unknown localized state {kind!r}")
    return v


def decompose_localized(kind, j0, n_rungs, p=None):
    """Project a rung-localized excitation onto the Bloch states of a periodic ladder.

    ``kind`` is ``"symmetric"``, ``"antisymmetric"``, ``"single-site"``
    (leg B) or ``"single-site-A"`` / ``"single-site-B"``.  The amplitude
    on ``|psi_bk>`` is the overlap ``<psi_bk|psi>``, so the decomposition is
    exact and :meth:`LocalizedDecomposition.reconstruct` inverts it.
    """
    p = BlochParams(1.0, 0.5 * np.pi) if p is None else p
    v = localized_vector(kind, j0, n_rungs)
    ks = momentum_grid(n_rungs)
    upper = np.array([np.vdot(bloch_state(p, n_rungs, k, "upper"), v) for k in ks])
    lower = np.array([np.vdot(bloch_state(p, n_rungs, k, "lower"), v) for k in ks])
    return LocalizedDecomposition(ks, upper, lower, p)
