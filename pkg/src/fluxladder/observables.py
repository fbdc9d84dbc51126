"""Currents and densities.

The current through a bond whose Hamiltonian coefficient is ``h`` (on
``a_a^dag a_b``) is ``J = i h a_a^dag a_b + h.c.``, the rate at which
particles arrive on site ``b``.  On a leg bond this is the flow from rung
``j`` to rung ``j + 1``; in the uniform gauge it is exactly
``i t0 e^{i phi/2} a_Aj^dag a_A(j+1) + h.c.``.  On a rung it is the flow
from A into B.  Using the bond's own coefficient keeps the currents gauge
covariant.

Expectation values go through the one-body density matrix
``rho[a, b] = <a_a^dag a_b>``, so no many-body operator has to be formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_hermitian, check_int, leg_index
from .bands import BlochParams, band_eigenvector, critical_flux, kramers_q
from .errors import DomainError, InvalidArgumentError, InvalidStateError
from .lattice import lift, single_particle_hamiltonian

__all__ = [
    "CurrentReport",
    "AnalyticCurrents",
    "bond_current_matrix",
    "rung_current_matrix",
    "bond_current_operator",
    "rung_current_operator",
    "chiral_current_operator",
    "one_body_density",
    "expectation",
    "measure",
    "analytic_currents",
    "delta_n",
    "densities",
    "measure_mixed",
    "site_divergence",
    "hamiltonian_expectation",
    "NORM_TOL",
]

NORM_TOL = 1e-8
_IMAG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CurrentReport:
    """Measured currents: ``leg[leg, b]`` per leg bond, ``rung[j-1]`` per rung,
    ``density[leg, j-1]`` per site."""

    leg: np.ndarray
    rung: np.ndarray
    chiral: float
    density: np.ndarray

    @property
    def leg_a(self):
        return self.leg[0]

    @property
    def leg_b(self):
        return self.leg[1]


def _coefficients(c):
    leg = c.leg_t * np.exp(1j * c.leg_phase)
    rung = c.rung_t * np.exp(1j * c.rung_phase)
    return leg, rung


def _bond_sites(c, leg, b):
    n = c.n_rungs
    return leg * n + b, leg * n + (b + 1) % n


def bond_current_matrix(c, leg, b):
    """Single-particle matrix of the current on leg bond ``b`` (0-based)."""
    leg = leg_index(leg)
    b = check_int(b, "bond index", low=0, high=c.n_bonds - 1)
    n = c.n_rungs
    h = _coefficients(c)[0][leg, b]
    s, s1 = _bond_sites(c, leg, b)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[s, s1] += 1j * h
    m[s1, s] += -1j * np.conj(h)
    return m


def rung_current_matrix(c, j):
    """Single-particle matrix of the A -> B current on rung ``j`` (1-based)."""
    j = check_int(j, "rung index", low=1, high=c.n_rungs)
    n = c.n_rungs
    h = _coefficients(c)[1][j - 1]
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[j - 1, n + j - 1] = 1j * h
    m[n + j - 1, j - 1] = -1j * np.conj(h)
    return m


def bond_current_operator(c, leg, b, basis):
    return lift(bond_current_matrix(c, leg, b), basis)


def rung_current_operator(c, j, basis):
    return lift(rung_current_matrix(c, j), basis)


def chiral_current_operator(c, basis):
    """``J_C = sum_b J_A,b - sum_b J_B,b`` on ``basis``."""
    m = sum(bond_current_matrix(c, 0, b) - bond_current_matrix(c, 1, b) for b in range(c.n_bonds))
    if c.n_bonds == 0:
        m = np.zeros((2 * c.n_rungs,) * 2, dtype=complex)
    return lift(m, basis)


def _checked_state(state, basis):
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (basis.dim,):
        raise InvalidArgumentError(f"state has shape {psi.shape}, basis dimension is {basis.dim}")
    if not np.all(np.isfinite(psi)):
        raise InvalidStateError("state has non-finite amplitudes")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > NORM_TOL:
        raise InvalidStateError(f"state is not normalized (norm {norm:.12g})")
    return psi


def one_body_density(state, basis):
    """``rho[a, b] = <psi| a_a^dag a_b |psi>`` over the ``2N`` sites."""
    psi = _checked_state(state, basis)
    src, dst, a, b = basis.moves
    rho = np.zeros((basis.n_sites, basis.n_sites), dtype=complex)
    np.add.at(rho, (a, b), np.conj(psi[dst]) * psi[src])
    rho[np.diag_indices(basis.n_sites)] = basis.occupations.T @ np.abs(psi) ** 2
    return rho


def _real(value, what):
    if abs(np.imag(value)) > _IMAG_TOL * max(1.0, abs(value)):
        raise InvalidStateError(f"{what} has imaginary part {np.imag(value):.3g}")
    return float(np.real(value))


def expectation(state, op, basis=None):
    """``<psi|op|psi>`` of a Hermitian many-body matrix, checked to be real."""
    psi = np.asarray(state, dtype=complex)
    if basis is not None:
        psi = _checked_state(psi, basis)
    elif abs(np.linalg.norm(psi) - 1) > NORM_TOL:
        raise InvalidStateError("state is not normalized")
    return _real(np.vdot(psi, np.asarray(op) @ psi), "expectation value")


def _report_from_rho(c, rho):
    n = c.n_rungs
    leg_h, rung_h = _coefficients(c)
    leg = np.zeros((2, c.n_bonds))
    for lg in (0, 1):
        for b in range(c.n_bonds):
            s, s1 = _bond_sites(c, lg, b)
            leg[lg, b] = -2.0 * np.imag(leg_h[lg, b] * rho[s, s1])
    j = np.arange(n)
    rung = -2.0 * np.imag(rung_h * rho[j, n + j])
    density = np.real(np.diag(rho)).reshape(2, n)
    chiral = float(leg[0].sum() - leg[1].sum())
    return CurrentReport(leg, rung, chiral, density)


def measure(state, c, basis):
    """All currents and densities of a normalized state."""
    if c.n_rungs != basis.n_rungs:
        raise InvalidArgumentError("couplings and basis disagree on N")
    return _report_from_rho(c, one_body_density(state, basis))


def measure_mixed(rho_states, c, basis):
    """Average report over an orthonormal set of states (trace over a projector)."""
    reports = [measure(s, c, basis) for s in rho_states]
    k = len(reports)
    return CurrentReport(
        sum(r.leg for r in reports) / k,
        sum(r.rung for r in reports) / k,
        sum(r.chiral for r in reports) / k,
        sum(r.density for r in reports) / k,
    )


def densities(state, basis):
    """Site occupations ``<n_leg,j>`` as a ``(2, N)`` array."""
    psi = _checked_state(state, basis)
    return (basis.occupations.T @ np.abs(psi) ** 2).reshape(2, basis.n_rungs)


def delta_n(dens):
    """Left-minus-right occupation difference on each leg.

    ``dens`` is a ``(2, N)`` density array.  The center rung ``ceil(N/2)`` is
    excluded, so for ``N = 10`` the sums run over rungs 1..4 and 6..10.
    """
    dens = np.asarray(dens, dtype=float)
    if dens.ndim != 2 or dens.shape[0] != 2:
        raise InvalidArgumentError("densities must have shape (2, N)")
    n = dens.shape[1]
    if n < 3:
        raise InvalidArgumentError(f"N must be >= 3 for a left/right split, got {n}")
    c = math.ceil(n / 2)
    left = dens[:, : c - 1].sum(axis=1)
    right = dens[:, c:].sum(axis=1)
    out = left - right
    return float(out[0]), float(out[1])


@dataclass(frozen=True)
class AnalyticCurrents:
    """Closed-form ground-state currents; per-bond arrays are indexed by ``j = 1..N``."""

    phase: str
    leg_a: np.ndarray
    leg_b: np.ndarray
    rung: np.ndarray
    chiral: float
    q: float | None = None


def analytic_currents(t0, phi, n_rungs, phase="auto", j=None):
    """Infinite-ladder ground-state currents in the uniform symmetric gauge.

    Meissner (``|phi| <= phi_c``): ``J_Aj = -J_Bj = (t0/N) sin(phi/2)``,
    ``J_C = 2 t0 sin(phi/2)``, no rung current.

    Vortex (``phi > phi_c``), for the equal-weight Kramers combination of
    the two minima, with ``a+-``/``b+-`` the lower-band coefficients at
    ``+-q``::

        J_Aj = (t0/N) [a+^2 sin(q + phi/2) - a-^2 sin(q - phi/2)
                       + 2 a- a+ sin(phi/2) cos(q + 2qj)]
        J_Bj = (t0/N) [b+^2 sin(q - phi/2) - b-^2 sin(q + phi/2)
                       - 2 b- b+ sin(phi/2) cos(q + 2qj)]
        J_C  = t0 [a+^2 sin(phi/2 + q) - a-^2 sin(q - phi/2)
                   - b+^2 sin(q - phi/2) + b-^2 sin(phi/2 + q)]
        J_j  = (t0/N) sin(2qj) [a+ b- - a- b+]
    """
    n = check_int(n_rungs, "N", low=1)
    js = np.arange(1, n + 1) if j is None else np.atleast_1d(np.asarray(j, dtype=float))
    pc = critical_flux()
    if phase == "auto":
        phase = "meissner" if abs(phi) <= pc else "vortex"
    if phase == "meissner":
        if abs(phi) > pc:
            raise DomainError(f"the Meissner formulas hold for |phi| <= phi_c, got phi={phi}")
        s = math.sin(phi / 2)
        leg = np.full(js.shape, t0 * s / n)
        return AnalyticCurrents("meissner", leg, -leg, np.zeros(js.shape), 2 * t0 * s)
    if phase != "vortex":
        raise InvalidArgumentError(f"phase must be 'meissner', 'vortex' or 'auto', got {phase!r}")
    if not pc < phi <= math.pi:
        raise DomainError(f"the vortex formulas hold for phi_c < phi <= pi, got phi={phi}")
    q = kramers_q(phi)
    p = BlochParams(1.0, phi)
    ap, bp = (float(x) for x in band_eigenvector(p, q))
    am, bm = (float(x) for x in band_eigenvector(p, -q))
    s, h = math.sin(phi / 2), phi / 2
    osc = np.cos(q + 2 * q * js)
    leg_a = (t0 / n) * (ap**2 * math.sin(q + h) - am**2 * math.sin(q - h) + 2 * am * ap * s * osc)
    leg_b = (t0 / n) * (bp**2 * math.sin(q - h) - bm**2 * math.sin(q + h) - 2 * bm * bp * s * osc)
    chiral = t0 * (ap**2 * math.sin(h + q) - am**2 * math.sin(q - h) - bp**2 * math.sin(q - h) + bm**2 * math.sin(h + q))
    rung = (t0 / n) * np.sin(2 * q * js) * (ap * bm - am * bp)
    return AnalyticCurrents("vortex", leg_a, leg_b, rung, float(chiral), q)


def site_divergence(report, c):
    """Net current flowing out of every site, ``(2, N)``; zero in a stationary state."""
    n = c.n_rungs
    out = np.zeros((2, n))
    for leg in (0, 1):
        for b in range(c.n_bonds):
            j, jn = b, (b + 1) % n
            out[leg, j] += report.leg[leg, b]
            out[leg, jn] -= report.leg[leg, b]
    out[0] += report.rung
    out[1] -= report.rung
    return out


def hamiltonian_expectation(state, c, basis):
    """``<H_eff>`` via the one-body density matrix."""
    rho = one_body_density(state, basis)
    h = check_hermitian(single_particle_hamiltonian(c), "single-particle Hamiltonian")
    return _real(np.sum(h * rho), "energy")
