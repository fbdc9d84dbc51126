"""Exact diagonalization, chiral-current scans and current maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import check_hermitian
from .bands import BlochParams, band_energies, bloch_state, momentum_grid
from .couplings import bessel_j, uniform_couplings
from .errors import InvalidArgumentError
from .lattice import build_basis, build_effective_hamiltonian
from .observables import analytic_currents, measure, measure_mixed

__all__ = [
    "ground_states",
    "ScanPoint",
    "chiral_current_scan",
    "classify_phase",
    "CurrentMap",
    "current_map",
    "kramers_combination",
    "uniform_t0",
]

_PARTIAL = 8


def ground_states(h, degeneracy_tol=None):
    """Lowest eigenvalue of ``h`` and every eigenpair within ``degeneracy_tol`` of it.

    Returns ``(energies, states)`` with the states as columns.  The default
    tolerance is ``1e-8 * ||h||_inf``.
    """
    h = check_hermitian(h, "Hamiltonian")
    dim = h.shape[0]
    if degeneracy_tol is None:
        # the max-row-sum norm bounds the spectral norm and costs O(dim^2)
        tol = 1e-8 * max(float(np.linalg.norm(h, np.inf)), 1e-300)
    else:
        tol = float(degeneracy_tol)
    count = min(dim, _PARTIAL)
    while True:
        w, v = scipy.linalg.eigh(h, subset_by_index=[0, count - 1])
        keep = w <= w[0] + tol
        if not keep.all() or count == dim:
            return w[keep], v[:, keep]
        count = min(dim, 2 * count)


def uniform_t0(spec, alpha=1.0):
    """Effective hopping ``g J0(alpha) J1(alpha)`` of a uniformly driven ladder."""
    g = float(np.mean(spec.g_rung))
    return g * bessel_j(0, alpha) * bessel_j(1, alpha)


@dataclass(frozen=True)
class ScanPoint:
    phi: float
    chiral: float
    analytic: float
    energy: float
    degeneracy: int


def chiral_current_scan(spec, alpha, phi_grid, n_exc=1, degeneracy_tol=None):
    """Ground-state chiral current across a flux grid.

    The ladder uses the uniform symmetric gauge with ``t0 = g J0(alpha) J1(alpha)``.
    A degenerate ground space is represented by its projector, i.e. the
    current is averaged over an orthonormal basis of the ground space.  For a
    Kramers pair this equals the value in the equal-weight combination of
    the two momentum states, and it does not depend on the basis the
    eigensolver happens to return.  The ``analytic`` column carries the
    single-excitation infinite-ladder prediction.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.ndim != 1 or np.any(phi_grid <= 0) or np.any(phi_grid > np.pi):
        raise InvalidArgumentError("phi grid must lie in (0, pi]")
    t0 = uniform_t0(spec, alpha)
    basis = build_basis(spec, n_exc)
    out = []
    for phi in phi_grid:
        c = uniform_couplings(spec.n_rungs, t0, phi, spec.boundary)
        energies, states = ground_states(build_effective_hamiltonian(c, basis), degeneracy_tol)
        report = measure_mixed(states.T, c, basis)
        ref = analytic_currents(t0, phi, spec.n_rungs).chiral
        out.append(ScanPoint(float(phi), report.chiral, ref, float(energies[0]), int(energies.size)))
    return out


def classify_phase(report, tol=1e-8):
    """``"meissner"`` when rung currents vanish and leg currents are uniform, else ``"vortex"``."""
    rung_quiet = np.max(np.abs(report.rung), initial=0.0) <= tol
    spread = np.ptp(report.leg, axis=1) if report.leg.size else np.zeros(2)
    return "meissner" if rung_quiet and np.all(spread <= tol) else "vortex"


@dataclass(frozen=True, eq=False)
class CurrentMap:
    """Arrow data for a current map: ``bonds`` rows are ``(kind, leg, j, current)``
    where a leg bond ``j`` runs from rung ``j`` to the next one and a rung row
    gives the A -> B current; ``sites`` rows are ``(leg, j, density)``."""

    bonds: list
    sites: list
    chiral: float

    def as_dict(self):
        return {
            "bonds": [dict(zip(("kind", "leg", "j", "current"), r)) for r in self.bonds],
            "sites": [dict(zip(("leg", "j", "density"), r)) for r in self.sites],
            "chiral": self.chiral,
        }


def current_map(state, c, basis):
    report = measure(state, c, basis)
    bonds = []
    for leg, name in ((0, "A"), (1, "B")):
        for b in range(c.n_bonds):
            bonds.append(("leg", name, b + 1, float(report.leg[leg, b])))
    for j in range(c.n_rungs):
        bonds.append(("rung", "AB", j + 1, float(report.rung[j])))
    sites = [
        (name, j + 1, float(report.density[leg, j]))
        for leg, name in ((0, "A"), (1, "B"))
        for j in range(c.n_rungs)
    ]
    return CurrentMap(bonds, sites, report.chiral)


def kramers_combination(n_rungs, t0, phi, ground_space=None):
    """Equal-weight superposition of the two lower-band minima on the momentum grid.

    Builds ``(|psi_L(-k)> + |psi_L(k)>) / sqrt(2)`` in the single-excitation
    sector of a periodic uniform ladder, where ``+-k`` are the grid momenta of
    lowest lower-band energy.  When ``ground_space`` (columns) is given, the
    state is projected onto it and renormalized.  Returns ``(state, k)``.
    """
    p = BlochParams(t0, phi)
    ks = momentum_grid(n_rungs)
    lower = band_energies(p, ks)[0]
    k = float(abs(ks[np.argmin(lower + 1e-12 * (ks < 0))]))
    if np.isclose(k, 0.0) or np.isclose(k, np.pi):
        raise InvalidArgumentError("the lower band has a single minimum on this grid")
    vec = (bloch_state(p, n_rungs, -k) + bloch_state(p, n_rungs, k)) / np.sqrt(2)
    # single-excitation basis index equals site index
    if ground_space is not None:
        g = np.asarray(ground_space)
        vec = g @ (g.conj().T @ vec)
        vec = vec / np.linalg.norm(vec)
    return vec, k

