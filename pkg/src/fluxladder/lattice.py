"""Real-space model builder for the hard-core boson ladder.

Sites are numbered ``s = leg * N + (j - 1)`` with leg A = 0, leg B = 1 and
rungs ``j = 1..N``.  Leg bond ``b`` (0-based) joins rung ``b + 1`` to rung
``b + 2``; for a periodic ladder the last bond joins rung ``N`` back to rung 1.
Plaquette ``p`` (1-based) sits between rung ``p`` and the next rung.

Every operator in this package is a number-conserving one-body operator
``sum_ab h[a, b] a_a^dag a_b``.  :func:`lift` maps the single-particle matrix
``h`` onto an excitation sector; hard-core bosons carry no exchange sign, so
the lifted matrix element is just ``h[a, b]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_array, check_boundary, check_int, leg_index
from .errors import InvalidArgumentError, UnsupportedSectorError

__all__ = [
    "LadderSpec",
    "SectorBasis",
    "site_index",
    "build_basis",
    "lift",
    "single_particle_hamiltonian",
    "build_effective_hamiltonian",
    "build_driven_hamiltonian",
    "frame_phases",
    "rotating_frame",
    "plaquette_flux",
    "plaquette_fluxes",
    "gauge_transform",
    "gauge_state",
    "basis_state",
    "wrap_phase",
]


def wrap_phase(x):
    """Wrap angles into (-pi, pi]."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)
    return float(y) if y.ndim == 0 else y


@dataclass(frozen=True)
class LadderSpec:
    """Ladder geometry and bare couplings.

    ``g_leg[leg, b]`` is the bare intraleg hopping on bond ``b`` and
    ``g_rung[j - 1]`` the bare interleg hopping on rung ``j``.  Both default
    to 1 (energies are then measured in units of ``g``).
    """

    n_rungs: int
    boundary: str = "periodic"
    g_leg: np.ndarray = None
    g_rung: np.ndarray = None

    def __post_init__(self):
        n = check_int(self.n_rungs, "N", low=1)
        check_boundary(self.boundary)
        if self.boundary == "periodic" and n < 3:
            raise InvalidArgumentError("N: a periodic ladder needs at least 3 rungs")
        nb = n if self.boundary == "periodic" else n - 1
        g_leg = np.ones((2, nb)) if self.g_leg is None else self.g_leg
        g_rung = np.ones(n) if self.g_rung is None else self.g_rung
        object.__setattr__(self, "n_rungs", n)
        object.__setattr__(self, "g_leg", check_array(g_leg, "g_leg", (2, nb)))
        object.__setattr__(self, "g_rung", check_array(g_rung, "g_rung", (n,)))

    @classmethod
    def uniform(cls, n_rungs, g=1.0, boundary="periodic", g_rung=None):
        n = check_int(n_rungs, "N", low=1)
        nb = n if boundary == "periodic" else n - 1
        gr = g if g_rung is None else g_rung
        return cls(n, boundary, np.full((2, nb), float(g)), np.full(n, float(gr)))

    @property
    def n_sites(self):
        return 2 * self.n_rungs

    @property
    def n_bonds(self):
        return self.n_rungs if self.boundary == "periodic" else self.n_rungs - 1

    @property
    def n_plaquettes(self):
        return self.n_bonds

    def bond_rungs(self, b):
        """Return the (left, right) rung numbers joined by leg bond ``b``."""
        return b + 1, (b + 1) % self.n_rungs + 1


def site_index(leg, j, n_rungs):
    """Site number of ``(leg, j)`` with ``j`` counted from 1."""
    j = check_int(j, "j", low=1, high=n_rungs)
    return leg_index(leg) * n_rungs + (j - 1)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Hard-core occupation basis of a fixed excitation number.

    ``configs`` lists the occupied sites of every basis state as sorted
    tuples, in lexicographic order.
    """

    n_rungs: int
    n_exc: int
    configs: tuple = field(repr=False)

    @property
    def n_sites(self):
        return 2 * self.n_rungs

    @property
    def dim(self):
        return len(self.configs)

    def __len__(self):
        return len(self.configs)

    @cached_property
    def _lookup(self):
        return {c: i for i, c in enumerate(self.configs)}

    def index(self, config):
        try:
            return self._lookup[tuple(sorted(config))]
        except KeyError:
            raise InvalidArgumentError(f"configuration {config!r} is not in the basis") from None

    @cached_property
    def occupations(self):
        occ = np.zeros((self.dim, self.n_sites))
        for i, c in enumerate(self.configs):
            occ[i, list(c)] = 1.0
        occ.setflags(write=False)
        return occ

    @cached_property
    def moves(self):
        """Single-particle hops as arrays ``(src, dst, a, b)``.

        Row ``i`` says that ``a_a^dag a_b`` maps basis state ``src[i]`` onto
        basis state ``dst[i]`` with unit amplitude.
        """
        src, dst, to, frm = [], [], [], []
        lookup = self._lookup
        for i, c in enumerate(self.configs):
            occupied = set(c)
            for b in c:
                rest = [s for s in c if s != b]
                for a in range(self.n_sites):
                    if a in occupied:
                        continue
                    new = tuple(sorted(rest + [a]))
                    src.append(i)
                    dst.append(lookup[new])
                    to.append(a)
                    frm.append(b)
        out = tuple(np.array(x, dtype=np.intp) for x in (src, dst, to, frm))
        for x in out:
            x.setflags(write=False)
        return out


def _enumerate(n_sites, n_exc):
    return tuple(itertools.combinations(range(n_sites), n_exc))


def build_basis(spec, n_exc):
    """Enumerate the ``n_exc``-excitation hard-core sector of a ladder.

    ``spec`` may be a :class:`LadderSpec` or a plain rung count.
    """
    n = spec.n_rungs if isinstance(spec, LadderSpec) else check_int(spec, "N", low=1)
    if not isinstance(n_exc, (int, np.integer)) or isinstance(n_exc, bool) or n_exc not in (1, 2):
        raise UnsupportedSectorError(f"only 1- and 2-excitation sectors are supported, got {n_exc!r}")
    configs = _enumerate(2 * n, n_exc)
    return SectorBasis(n, n_exc, configs)


def fock_basis(n_rungs):
    """All occupation sectors of a small ladder, concatenated (tests only)."""
    configs = tuple(c for n in range(2 * n_rungs + 1) for c in _enumerate(2 * n_rungs, n))
    return SectorBasis(n_rungs, -1, configs)


def lift(h, basis):
    """Many-body matrix of ``sum_ab h[a, b] a_a^dag a_b`` on ``basis``."""
    h = np.asarray(h)
    if h.shape != (basis.n_sites, basis.n_sites):
        raise InvalidArgumentError(
            f"single-particle matrix has shape {h.shape}, basis needs {(basis.n_sites,) * 2}"
        )
    src, dst, a, b = basis.moves
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    out[np.diag_indices(basis.dim)] = basis.occupations @ np.diag(h)
    np.add.at(out, (dst, src), h[a, b])
    return out


def _coefficient(t, phase):
    return t * np.exp(1j * phase)


def single_particle_hamiltonian(c):
    """One-body matrix of the effective ladder Hamiltonian for couplings ``c``."""
    n = c.n_rungs
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    for leg in (0, 1):
        for b in range(c.n_bonds):
            j, jn = b, (b + 1) % n
            amp = _coefficient(c.leg_t[leg, b], c.leg_phase[leg, b])
            h[leg * n + j, leg * n + jn] += amp
            h[leg * n + jn, leg * n + j] += np.conj(amp)
    for j in range(n):
        amp = _coefficient(c.rung_t[j], c.rung_phase[j])
        h[j, n + j] += amp
        h[n + j, j] += np.conj(amp)
    return h


def _check_sizes(obj, basis, what):
    if obj.n_rungs != basis.n_rungs:
        raise InvalidArgumentError(
            f"{what} describe {obj.n_rungs} rungs but the basis has {basis.n_rungs}"
        )


def build_effective_hamiltonian(c, basis):
    """Effective (rotating-wave) Hamiltonian of couplings ``c`` on ``basis``."""
    _check_sizes(c, basis, "couplings")
    return lift(single_particle_hamiltonian(c), basis)


def _static_hopping(spec):
    n = spec.n_rungs
    h = np.zeros((2 * n, 2 * n))
    for leg in (0, 1):
        for b in range(spec.n_bonds):
            j, jn = b, (b + 1) % n
            h[leg * n + j, leg * n + jn] += spec.g_leg[leg, b]
            h[leg * n + jn, leg * n + j] += spec.g_leg[leg, b]
    for j in range(n):
        h[j, n + j] += spec.g_rung[j]
        h[n + j, j] += spec.g_rung[j]
    return h


def build_driven_hamiltonian(spec, sched, basis, t):
    """Lab-frame Hamiltonian at time ``t`` with modulated qubit frequencies.

    The on-site interaction is absent: the hard-core basis already forbids
    double occupation.
    """
    _check_sizes(spec, basis, "ladder spec")
    _check_sizes(sched, basis, "drive schedule")
    h = _static_hopping(spec).astype(complex)
    h[np.diag_indices_from(h)] += sched.frequencies_at(t).ravel()
    return lift(h, basis)


def frame_phases(sched, basis, t):
    """Per-configuration phase of the rotating-frame unitary at time ``t``."""
    _check_sizes(sched, basis, "drive schedule")
    theta = -sched.base_frequency * t + sched.alpha * np.cos(sched.frequency * t + sched.phase)
    return basis.occupations @ theta.ravel()


def rotating_frame(sched, basis, t):
    """Diagonal unitary ``U(t)`` taking rotating-frame states to the lab frame."""
    return np.diag(np.exp(1j * frame_phases(sched, basis, t)))


def _directed_phases(c):
    """Phases of the leg and rung coefficients; negative magnitudes add pi."""
    leg = c.leg_phase + np.pi * (np.asarray(c.leg_t) < 0)
    rung = c.rung_phase + np.pi * (np.asarray(c.rung_t) < 0)
    return leg, rung


def plaquette_fluxes(c):
    """Gauge-invariant flux of every plaquette, wrapped to (-pi, pi].

    The flux of plaquette ``p`` is the phase of the product of hopping
    coefficients around ``A_p -> A_p+1 -> B_p+1 -> B_p -> A_p``.
    """
    leg, rung = _directed_phases(c)
    b = np.arange(c.n_bonds)
    nxt = (b + 1) % c.n_rungs
    return wrap_phase(leg[0, b] + rung[nxt] - leg[1, b] - rung[b])


def plaquette_flux(c, p):
    p = check_int(p, "plaquette index", low=1, high=c.n_bonds)
    return float(plaquette_fluxes(c)[p - 1])


def gauge_transform(c, site_phases):
    """Apply the local U(1) rotation ``a_s -> exp(i theta_s) a_s``.

    The coefficient of ``a_a^dag a_b`` picks up ``theta_a - theta_b``;
    magnitudes are untouched, so spectra and fluxes are unchanged.
    """
    from .couplings import EffectiveCouplings

    n = c.n_rungs
    theta = check_array(site_phases, "site_phases", (2 * n,)).reshape(2, n)
    b = np.arange(c.n_bonds)
    nxt = (b + 1) % n
    leg_phase = c.leg_phase + theta[:, b] - theta[:, nxt]
    rung_phase = c.rung_phase + theta[0] - theta[1]
    return EffectiveCouplings(c.leg_t, leg_phase, c.rung_t, rung_phase, c.boundary)


def gauge_state(state, basis, site_phases):
    """Transform a state vector with the same rotation as :func:`gauge_transform`."""
    theta = check_array(site_phases, "site_phases", (basis.n_sites,))
    return np.exp(1j * (basis.occupations @ theta)) * np.asarray(state)


def basis_state(basis, *sites):
    """Unit vector of the configuration with the given ``(leg, j)`` sites occupied."""
    config = [site_index(leg, j, basis.n_rungs) for leg, j in sites]
    if len(set(config)) != len(config):
        raise InvalidArgumentError("hard-core sites cannot be doubly occupied")
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(config)] = 1.0
    return v
