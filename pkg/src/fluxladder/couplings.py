"""Floquet-engineering layer: Bessel functions, effective couplings, flux synthesis.

Each qubit frequency is modulated as ``w0 + eps * sin(u t + phi)``.  In the
rotating frame every hopping acquires a Jacobi-Anger series of Bessel
harmonics; with the resonance ladder of :func:`frequency_ladder` only the
``J0 * J1`` harmonic is static, giving

* leg bond into rung ``j``:  ``t = g J0(alpha_{j-1}) J1(alpha_j)`` with phase
  ``(-1)**(j+1) * phi_j + pi/2`` (:func:`hopping_phase`),
* rung ``j``:  ``t~ = g~ J0(alpha_Aj) J1(alpha_Bj)`` with phase
  ``phi_Bj + pi/2`` (:func:`rung_phase`).

The rung resonance ``w0_B - w0_A = +u_B`` holds on every rung, so unlike the
legs the rung phase does not alternate with ``j``.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from ._validation import check_array, check_boundary, check_finite, check_int
from .errors import InvalidArgumentError
from .lattice import LadderSpec, wrap_phase

__all__ = [
    "bessel_j",
    "effective_hopping",
    "interleg_surface",
    "hopping_phase",
    "rung_phase",
    "DriveSchedule",
    "EffectiveCouplings",
    "FluxPattern",
    "uniform_couplings",
    "effective_couplings",
    "synthesize_flux",
    "frequency_ladder",
    "drive_schedule",
    "Violation",
    "validate_resonance",
    "RESONANCE_TOL",
]

RESONANCE_TOL = 1e-9
_SERIES_LIMIT = 12.0
_QUADRATURE_POINTS = 128


def _bessel_series(m, x):
    # J_m(x) = sum_k (-1)^k (x/2)^(2k+m) / (k! (k+m)!)
    half = x / 2.0
    term = half**m / math.factorial(m)
    total = np.array(term, dtype=float)
    biggest = np.abs(total)
    k = 0
    while True:
        k += 1
        term = term * (-(half**2)) / (k * (k + m))
        total = total + term
        biggest = np.maximum(biggest, np.abs(term))
        if np.all(np.abs(term) <= 1e-16 * np.maximum(biggest, 1e-300)) and k > np.max(np.abs(half)):
            return total


def _bessel_quadrature(m, x):
    # J_m(x) = (1/2pi) int_0^2pi cos(m tau - x sin tau) dtau; the trapezoid
    # rule is spectrally accurate for this periodic integrand.
    tau = 2 * np.pi * np.arange(_QUADRATURE_POINTS) / _QUADRATURE_POINTS
    vals = np.cos(m * tau[:, None] - np.atleast_1d(x)[None, :] * np.sin(tau)[:, None])
    return vals.mean(axis=0).reshape(np.shape(x))


def bessel_j(m, x):
    """Bessel function of the first kind ``J_m(x)`` for integer ``0 <= m <= 20``.

    Uses the ascending power series for ``|x| <= 12`` and a periodic
    trapezoid rule on the integral representation beyond that, where the
    alternating series starts losing digits.  Accepts scalars or arrays.
    """
    if isinstance(m, bool) or not isinstance(m, numbers.Integral):
        raise InvalidArgumentError(f"Bessel order must be an integer, got {m!r}")
    m = check_int(m, "Bessel order", low=0, high=20)
    x = np.asarray(check_finite(x, "x"), dtype=float)
    small = np.abs(x) <= _SERIES_LIMIT
    out = np.empty_like(x)
    if np.any(small):
        out[small] = _bessel_series(m, x[small])
    if np.any(~small):
        out[~small] = _bessel_quadrature(m, x[~small])
    return float(out) if out.ndim == 0 else out


def effective_hopping(g, alpha_from, alpha_to):
    """Magnitude ``g * J0(alpha_from) * J1(alpha_to)`` of a dressed hopping.

    The sign is kept: past the first zero of ``J1`` (or ``J0``) the hopping
    turns negative, which the preparation protocols exploit.
    """
    g = check_finite(g, "g")
    return g * bessel_j(0, alpha_from) * bessel_j(1, alpha_to)


def interleg_surface(alpha_a, alpha_b):
    """Matrix of ``J0(alpha_a[i]) * J1(alpha_b[j])``, the rung hopping in units of g~."""
    a = np.asarray(alpha_a, dtype=float)
    b = np.asarray(alpha_b, dtype=float)
    for name, grid in (("alpha_A grid", a), ("alpha_B grid", b)):
        if grid.ndim != 1 or grid.size == 0:
            raise InvalidArgumentError(f"{name} must be a nonempty 1-d sequence")
        check_finite(grid, name)
        if np.any(np.diff(grid) < 0):
            raise InvalidArgumentError(f"{name} must be sorted")
    return np.outer(bessel_j(0, a), bessel_j(1, b))


def hopping_phase(phi_drive, j):
    """Phase ``(-1)**(j+1) * phi_drive + pi/2`` of the leg bond ending on rung ``j``."""
    j = check_int(j, "j", low=1)
    sign = 1.0 if j % 2 == 1 else -1.0
    return wrap_phase(sign * check_finite(phi_drive, "phi_drive") + np.pi / 2)


def rung_phase(phi_drive_b):
    """Phase ``phi_B + pi/2`` of a rung hopping, set by the B-site drive phase."""
    return wrap_phase(check_finite(phi_drive_b, "phi_drive_b") + np.pi / 2)


@dataclass(frozen=True, eq=False)
class DriveSchedule:
    """Per-site frequency modulation; arrays have shape ``(2, N)`` indexed ``[leg, j-1]``.

    ``amplitude`` and ``frequency`` are angular frequencies, ``phase`` is in
    radians.  ``alpha = amplitude / frequency`` is the modulation index.
    """

    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray
    base_frequency: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.frequency)
        if len(shape) != 2 or shape[0] != 2:
            raise InvalidArgumentError(f"frequency must have shape (2, N), got {shape}")
        for name in ("amplitude", "frequency", "phase", "base_frequency"):
            object.__setattr__(self, name, check_array(getattr(self, name), name, shape))
        if np.any(self.frequency <= 0):
            raise InvalidArgumentError("modulation frequencies must be positive")
        if np.any(self.alpha < 0):
            raise InvalidArgumentError("modulation indices must be non-negative")

    @property
    def n_rungs(self):
        return self.frequency.shape[1]

    @property
    def alpha(self):
        return self.amplitude / self.frequency

    def frequencies_at(self, t):
        """Instantaneous qubit frequencies ``w0 + eps sin(u t + phi)``."""
        return self.base_frequency + self.amplitude * np.sin(self.frequency * t + self.phase)


@dataclass(frozen=True, eq=False)
class EffectiveCouplings:
    """Complex hoppings of the effective ladder.

    ``leg_t[leg, b] * exp(1j * leg_phase[leg, b])`` multiplies
    ``a^dag_{leg, b+1} a_{leg, b+2}`` and ``rung_t[j-1] * exp(1j * rung_phase[j-1])``
    multiplies ``a^dag_{A j} a_{B j}``.  Phases are stored wrapped to (-pi, pi].
    """

    leg_t: np.ndarray
    leg_phase: np.ndarray
    rung_t: np.ndarray
    rung_phase: np.ndarray
    boundary: str = "periodic"

    def __post_init__(self):
        check_boundary(self.boundary)
        n = np.size(self.rung_t)
        nb = n if self.boundary == "periodic" else n - 1
        object.__setattr__(self, "leg_t", check_array(self.leg_t, "leg_t", (2, nb)))
        object.__setattr__(self, "leg_phase", wrap_phase(check_array(self.leg_phase, "leg_phase", (2, nb))))
        object.__setattr__(self, "rung_t", check_array(self.rung_t, "rung_t", (n,)))
        object.__setattr__(self, "rung_phase", wrap_phase(check_array(self.rung_phase, "rung_phase", (n,))))

    @property
    def n_rungs(self):
        return self.rung_t.size

    @property
    def n_bonds(self):
        return self.leg_t.shape[1]

    def scaled(self, factor):
        return EffectiveCouplings(
            self.leg_t * factor, self.leg_phase, self.rung_t * factor, self.rung_phase, self.boundary
        )


@dataclass(frozen=True)
class FluxPattern:
    """Target flux per plaquette: uniform ``phi``, staggered ``(-1)**p phi``,
    linear ``p phi`` or an explicit ``values`` list."""

    kind: str = "uniform"
    phi: float = 0.0
    values: tuple = None

    def __post_init__(self):
        if self.kind not in ("uniform", "staggered", "linear", "custom"):
            raise InvalidArgumentError(f"unknown flux pattern {self.kind!r}")
        if self.kind == "custom" and self.values is None:
            raise InvalidArgumentError("a custom flux pattern needs explicit values")

    def fluxes(self, n_plaquettes):
        p = np.arange(1, n_plaquettes + 1)
        if self.kind == "uniform":
            out = np.full(n_plaquettes, float(self.phi))
        elif self.kind == "staggered":
            out = (-1.0) ** p * self.phi
        elif self.kind == "linear":
            out = p * float(self.phi)
        else:
            out = np.asarray(self.values, dtype=float)
            if out.shape != (n_plaquettes,):
                raise InvalidArgumentError(
                    f"custom flux list has {out.size} entries, ladder has {n_plaquettes} plaquettes"
                )
        return check_finite(out, "flux values")


def uniform_couplings(n_rungs, t0, phi, boundary="periodic"):
    """Uniform ladder in the symmetric gauge: legs ``t0 e^{+-i phi/2}``, real rungs ``t0``.

    This is the gauge in which the Bloch Hamiltonian reads
    ``eps0(k) + t0 sigma_x + eps_z(k) sigma_z``.
    """
    spec = LadderSpec.uniform(n_rungs, boundary=boundary)
    nb = spec.n_bonds
    leg_t = np.full((2, nb), float(t0))
    leg_phase = np.vstack([np.full(nb, phi / 2), np.full(nb, -phi / 2)])
    return EffectiveCouplings(leg_t, leg_phase, np.full(spec.n_rungs, float(t0)), np.zeros(spec.n_rungs), boundary)


def _alpha_grid(alpha, n):
    a = np.broadcast_to(np.asarray(alpha, dtype=float), (2, n)).copy()
    check_finite(a, "alpha")
    if np.any(a < 0):
        raise InvalidArgumentError("alpha must be non-negative")
    return a


def _couplings_from_phases(spec, phases, alpha):
    n, nb = spec.n_rungs, spec.n_bonds
    alpha = _alpha_grid(alpha, n)
    j0, j1 = bessel_j(0, alpha), bessel_j(1, alpha)
    b = np.arange(nb)
    nxt = (b + 1) % n
    leg_t = spec.g_leg * j0[:, b] * j1[:, nxt]
    leg_phase = np.empty((2, nb))
    for leg in (0, 1):
        for bond in b:
            leg_phase[leg, bond] = hopping_phase(phases[leg, nxt[bond]], int(nxt[bond]) + 1)
    rung_t = spec.g_rung * j0[0] * j1[1]
    return EffectiveCouplings(leg_t, leg_phase, rung_t, rung_phase(phases[1]), spec.boundary)


def effective_couplings(spec, sched):
    """Rotating-wave couplings produced by a drive schedule."""
    if sched.n_rungs != spec.n_rungs:
        raise InvalidArgumentError("drive schedule and ladder spec disagree on N")
    return _couplings_from_phases(spec, sched.phase, sched.alpha)


def synthesize_flux(pattern, spec, alpha=1.0):
    """Drive phases realising ``pattern``, and the couplings they produce.

    Gauge choice: every B-site drive phase is zero, so all rung and B-leg
    hoppings carry phase ``pi/2`` and the flux of plaquette ``p`` is written
    on the A-leg bond that closes it.  Returns ``(phases, couplings)`` with
    ``phases`` of shape ``(2, N)``.
    """
    n = spec.n_rungs
    fluxes = pattern.fluxes(spec.n_plaquettes)
    phases = np.zeros((2, n))
    for p, flux in enumerate(fluxes, start=1):
        j = p % n + 1
        sign = 1.0 if j % 2 == 1 else -1.0
        phases[0, j - 1] = sign * flux
    phases = wrap_phase(phases)
    return phases, _couplings_from_phases(spec, phases, alpha)


def frequency_ladder(u, omega_base, spec, spread=1.0):
    """Base qubit frequencies satisfying the resonance conditions.

    Returns ``(base_frequency, modulation_frequency)``, both ``(2, N)``.
    With ``spread == 1`` every site is modulated at ``u``.  Larger spreads
    use the family ``u_B = u, spread*u`` (odd, even rungs), ``u_A = spread*u,
    (2*spread - 1)*u`` which keeps neighbouring modulation frequencies
    incommensurate so that only the ``J0 J1`` harmonic is resonant.
    """
    u = check_finite(u, "u")
    spread = check_finite(spread, "spread")
    if u <= 0:
        raise InvalidArgumentError("u must be positive")
    if spread < 1:
        raise InvalidArgumentError("spread must be >= 1")
    n = spec.n_rungs
    if spec.boundary == "periodic" and (n % 2 or spread != 1.0):
        raise InvalidArgumentError(
            "a periodic ladder closes the resonance ladder only for even N and spread == 1"
        )
    j = np.arange(1, n + 1)
    odd = j % 2 == 1
    u_b = np.where(odd, u, spread * u)
    u_a = np.where(odd, spread * u, (2 * spread - 1) * u)
    if spread == 1.0:
        u_a = np.full(n, u)
    omega_a = np.empty(n)
    omega_a[0] = omega_base
    for k in range(1, n):
        step = u_a[k] if odd[k] else -u_a[k]
        omega_a[k] = omega_a[k - 1] + step
    omega = np.vstack([omega_a, omega_a + u_b])
    return omega, np.vstack([u_a, u_b]).astype(float)


def drive_schedule(spec, phases=None, alpha=1.0, u=20.0, omega_base=0.0, spread=1.0):
    """Complete drive schedule: resonance ladder plus amplitudes ``alpha * u``."""
    omega, freq = frequency_ladder(u, omega_base, spec, spread)
    n = spec.n_rungs
    phases = np.zeros((2, n)) if phases is None else phases
    return DriveSchedule(_alpha_grid(alpha, n) * freq, freq, phases, omega)


@dataclass(frozen=True)
class Violation:
    kind: str  # "leg" or "rung"
    leg: str
    j: int
    residual: float


def validate_resonance(sched, spec, tol=RESONANCE_TOL):
    """List every resonance condition the base frequencies violate.

    Legs need ``w0_j - w0_{j-1} = +u_j`` (odd ``j``) or ``-u_j`` (even ``j``);
    rungs need ``w0_Bj - w0_Aj = u_Bj``.
    """
    if sched.n_rungs != spec.n_rungs:
        raise InvalidArgumentError("drive schedule and ladder spec disagree on N")
    out = []
    n = spec.n_rungs
    w, u = sched.base_frequency, sched.frequency
    for b in range(spec.n_bonds):
        prev, j = b, (b + 1) % n
        sign = 1.0 if (j + 1) % 2 == 1 else -1.0
        for leg, name in ((0, "A"), (1, "B")):
            residual = (w[leg, j] - w[leg, prev]) - sign * u[leg, j]
            if abs(residual) > tol:
                out.append(Violation("leg", name, j + 1, float(residual)))
    for j in range(n):
        residual = (w[1, j] - w[0, j]) - u[1, j]
        if abs(residual) > tol:
            out.append(Violation("rung", "AB", j + 1, float(residual)))
    return out
