"""Time evolution: static effective models, the driven ladder, ramps.

Static Hamiltonians are propagated exactly through their eigenbasis.  For
time-dependent problems a classical fourth-order Runge-Kutta step is used
with step-doubling error control.

The driven ladder is integrated in the interaction picture of its diagonal
part.  With ``U(t) = diag(exp(i Theta(t)))`` from
:func:`fluxladder.lattice.frame_phases`, ``psi_lab = U psi_I`` obeys
``i d psi_I/dt = U^dag H_hop U psi_I`` exactly, so the fast qubit
frequencies never enter the stepper.  No rotating-wave approximation is made.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import check_finite, check_hermitian
from .couplings import bessel_j, uniform_couplings
from .errors import AccuracyError, InvalidArgumentError
from .lattice import (
    _static_hopping,
    basis_state,
    build_basis,
    build_effective_hamiltonian,
    frame_phases,
    lift,
)
from .observables import delta_n, densities

__all__ = [
    "evolve_effective",
    "integrate",
    "evolve_driven",
    "FidelityTrace",
    "rwa_fidelity",
    "initial_state",
    "ChiralSnapshot",
    "chiral_experiment",
    "ShortTimeFit",
    "short_time_law",
    "smoothstep",
    "RampSchedule",
    "RampResult",
    "adiabatic_ramp",
    "rung_preparation_ramp",
    "prepare_superposition",
    "target_state",
    "NORM_DRIFT_TOL",
]

NORM_DRIFT_TOL = 1e-8
_LOCAL_TOL = 1e-13


def _as_state(psi0, dim):
    psi = np.array(psi0, dtype=complex)
    if psi.shape != (dim,):
        raise InvalidArgumentError(f"state has shape {psi.shape}, operator dimension is {dim}")
    if not np.all(np.isfinite(psi)):
        raise InvalidArgumentError("state has non-finite amplitudes")
    return psi


def evolve_effective(h, psi0, t):
    """``exp(-i H t) psi0`` for a static Hermitian ``H``.

    ``t`` may be a scalar (returns one state) or a 1-d array (returns one
    row per time).
    """
    h = check_hermitian(h, "Hamiltonian")
    psi = _as_state(psi0, h.shape[0])
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ psi
    times = np.asarray(check_finite(t, "t"), dtype=float)
    if times.ndim == 0:
        return v @ (np.exp(-1j * w * float(times)) * coeff)
    return (v @ (np.exp(-1j * np.outer(times, w)) * coeff).T).T


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + (h / 2) * k1)
    k3 = f(t + h / 2, y + (h / 2) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(rhs, psi0, t_span, dt_max, samples=None, local_tol=_LOCAL_TOL):
    """Adaptive RK4 with step doubling for ``dpsi/dt = rhs(t, psi)``.

    Each step is taken once with ``h`` and twice with ``h/2``; the
    difference estimates the local error, and the Richardson-extrapolated
    result is kept.  Steps never exceed ``dt_max`` and land exactly on every
    sample time.  Returns ``(times, states)``; the last row is the final
    state.  Raises :class:`AccuracyError` if the norm drifts by more than
    ``NORM_DRIFT_TOL``.
    """
    t_start, t_end = (float(x) for x in t_span)
    dt_max = check_finite(dt_max, "dt")
    if dt_max <= 0:
        raise InvalidArgumentError("dt must be positive")
    y = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(y)
    stops = [t_end] if samples is None else sorted(set(float(s) for s in samples) | {t_end})
    if stops and stops[0] < t_start:
        raise InvalidArgumentError("sample times must lie inside the integration window")
    times, states = [], []
    t, h = t_start, dt_max
    for stop in stops:
        while stop - t > 1e-14 * max(1.0, abs(stop)):
            h = min(h, dt_max, stop - t)
            full = _rk4(rhs, t, y, h)
            half = _rk4(rhs, t + h / 2, _rk4(rhs, t, y, h / 2), h / 2)
            err = np.linalg.norm(half - full) / 15
            if err > local_tol and h > 1e-12 * max(1.0, abs(t_end - t_start)):
                h *= max(0.2, 0.9 * (local_tol / err) ** 0.2)
                continue
            y = half + (half - full) / 15
            t += h
            grow = 5.0 if err == 0 else min(5.0, 0.9 * (local_tol / err) ** 0.2)
            h = max(h * grow, 1e-12)
        t = stop
        times.append(t)
        states.append(y.copy())
    drift = abs(np.linalg.norm(y) - norm0)
    if drift > NORM_DRIFT_TOL:
        raise AccuracyError(f"norm drifted by {drift:.3g} during integration", drift=drift)
    return np.array(times), np.array(states)


def _hopping_many_body(spec, basis):
    return lift(_static_hopping(spec).astype(complex), basis)


def _frame_rhs(spec, sched, basis):
    hop = _hopping_many_body(spec, basis)
    rows, cols = np.nonzero(hop)
    vals = hop[rows, cols]

    def rhs(t, y):
        theta = frame_phases(sched, basis, t)
        # U^dag H_hop U has entries h_ab exp(-i(Theta_a - Theta_b))
        amp = vals * np.exp(-1j * (theta[rows] - theta[cols])) * y[cols]
        out = np.zeros_like(y)
        np.add.at(out, rows, amp)
        return -1j * out

    return rhs


def _check_drive_step(sched, dt):
    limit = (2 * np.pi / float(np.max(sched.frequency))) / 40
    if dt > limit * (1 + 1e-12):
        raise InvalidArgumentError(
            f"dt={dt:.3g} does not resolve the fastest modulation; need dt <= {limit:.3g}"
        )


def evolve_driven(spec, sched, psi0, T, dt, basis=None, samples=None):
    """Lab-frame state of the frequency-modulated ladder at time ``T``.

    ``psi0`` lives in ``basis`` (single-excitation sector by default).  When
    ``samples`` is given, returns ``(times, states)`` instead of the final
    state alone.
    """
    basis = build_basis(spec, 1) if basis is None else basis
    if sched.n_rungs != spec.n_rungs or basis.n_rungs != spec.n_rungs:
        raise InvalidArgumentError("ladder spec, drive schedule and basis disagree on N")
    _check_drive_step(sched, dt)
    psi = _as_state(psi0, basis.dim)
    to_frame = np.exp(-1j * frame_phases(sched, basis, 0.0))
    times, states = integrate(_frame_rhs(spec, sched, basis), to_frame * psi, (0.0, T), dt, samples)
    lab = np.array([np.exp(1j * frame_phases(sched, basis, t)) * s for t, s in zip(times, states)])
    if samples is None:
        return lab[-1]
    return times, lab


@dataclass(frozen=True, eq=False)
class FidelityTrace:
    times: np.ndarray
    fidelity: np.ndarray

    @property
    def minimum(self):
        return float(np.min(self.fidelity))


def rwa_fidelity(spec, sched, c, psi0, T, samples=21, dt=None, basis=None):
    """Overlap of the driven evolution, seen in the rotating frame, with the effective model.

    ``F(t) = |<psi_eff(t)| U(t)^dag psi_lab(t)>|^2`` where ``psi_eff`` starts
    from ``U(0)^dag psi0`` and evolves under the couplings ``c``.
    """
    basis = build_basis(spec, 1) if basis is None else basis
    dt = (2 * np.pi / float(np.max(sched.frequency))) / 40 if dt is None else dt
    times = np.linspace(0.0, T, samples) if np.ndim(samples) == 0 else np.asarray(samples, dtype=float)
    psi = _as_state(psi0, basis.dim)
    t_lab, lab = evolve_driven(spec, sched, psi, T, dt, basis, samples=times)
    start = np.exp(-1j * frame_phases(sched, basis, 0.0)) * psi
    eff = evolve_effective(build_effective_hamiltonian(c, basis), start, t_lab)
    fid = []
    for t, s_lab, s_eff in zip(t_lab, lab, eff):
        rot = np.exp(-1j * frame_phases(sched, basis, t)) * s_lab
        fid.append(abs(np.vdot(s_eff, rot)) ** 2)
    keep = np.isin(t_lab, times)
    return FidelityTrace(t_lab[keep], np.array(fid)[keep])


_CHIRAL_KINDS = ("1S", "1AS", "1E", "2S", "2AS", "2E")


def initial_state(kind, basis, rung=5):
    """Localized initial states of the chiral-dynamics experiments.

    ``1S``/``1AS``: ``(a_A + -a_B)|0>/sqrt2`` on ``rung``; ``1E``: ``a_B|0>``;
    ``2S``/``2AS``: product of the symmetric/antisymmetric rung states on
    ``rung`` and ``rung + 1``; ``2E``: ``a_A a_B|0>`` on ``rung``.
    """
    if kind not in _CHIRAL_KINDS:
        raise InvalidArgumentError(f"unknown initial state {kind!r}; expected one of {_CHIRAL_KINDS}")
    n_exc = int(kind[0])
    if basis.n_exc != n_exc:
        raise InvalidArgumentError(f"{kind} needs the {n_exc}-excitation sector")
    j, j2 = rung, rung + 1
    if kind == "1E":
        return basis_state(basis, ("B", j))
    if kind == "2E":
        return basis_state(basis, ("A", j), ("B", j))
    sign = 1.0 if kind.endswith("S") and not kind.endswith("AS") else -1.0
    if n_exc == 1:
        return (basis_state(basis, ("A", j)) + sign * basis_state(basis, ("B", j))) / np.sqrt(2)
    psi = np.zeros(basis.dim, dtype=complex)
    for la, sa in (("A", 1.0), ("B", sign)):
        for lb, sb in (("A", 1.0), ("B", sign)):
            psi += sa * sb * basis_state(basis, (la, j), (lb, j2))
    return psi / 2


@dataclass(frozen=True, eq=False)
class ChiralSnapshot:
    t: float
    density: np.ndarray
    delta_a: float
    delta_b: float


def chiral_experiment(kind, spec, phi, t_snapshots, t0=1.0, rung=5):
    """Density snapshots of a localized excitation spreading on a uniform-flux ladder."""
    if kind not in _CHIRAL_KINDS:
        raise InvalidArgumentError(f"unknown initial state {kind!r}; expected one of {_CHIRAL_KINDS}")
    basis = build_basis(spec, int(kind[0]))
    c = uniform_couplings(spec.n_rungs, t0, phi, spec.boundary)
    psi0 = initial_state(kind, basis, rung)
    states = evolve_effective(build_effective_hamiltonian(c, basis), psi0, np.atleast_1d(t_snapshots))
    out = []
    for t, s in zip(np.atleast_1d(t_snapshots), states):
        dens = densities(s, basis)
        da, db = delta_n(dens)
        out.append(ChiralSnapshot(float(t), dens, da, db))
    return out


@dataclass(frozen=True)
class ShortTimeFit:
    coefficient: float
    delta_a: tuple
    residual: float
    outside_validity: bool


def short_time_law(kind, spec, phi, dt_grid, t0=1.0, rung=5):
    """Least-squares fit of ``delta_n_A(dt) = c dt^3`` for a 1S or 1AS start."""
    if kind not in ("1S", "1AS"):
        raise InvalidArgumentError(f"the short-time law is defined for 1S and 1AS, got {kind!r}")
    grid = np.asarray(dt_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError("dt grid must be a nonempty 1-d sequence")
    flagged = bool(np.any(grid <= 0) or np.any(grid > 0.2))
    if flagged:
        warnings.warn("short-time grid extends outside (0, 0.2]", RuntimeWarning, stacklevel=2)
    snaps = chiral_experiment(kind, spec, phi, grid, t0, rung)
    y = np.array([s.delta_a for s in snaps])
    x = grid**3
    coeff = float(np.dot(x, y) / np.dot(x, x))
    residual = float(np.linalg.norm(y - coeff * x))
    return ShortTimeFit(coeff, tuple(float(v) for v in y), residual, flagged)


def smoothstep(s):
    """``3 s^2 - 2 s^3`` on [0, 1], clamped outside."""
    s = np.clip(s, 0.0, 1.0)
    return 3 * s * s - 2 * s * s * s


@dataclass(frozen=True, eq=False)
class RampSchedule:
    """A Hamiltonian path ``H(s)``, ``s = t / duration`` in [0, 1].

    ``hamiltonian`` maps ``s`` to a Hermitian matrix on a fixed basis.
    ``paths`` optionally records the scalar control functions used to build
    it (name -> callable of ``s``) so protocols can be inspected.
    """

    duration: float
    hamiltonian: Callable[[float], np.ndarray]
    paths: dict = field(default_factory=dict)
    apply: Callable = None

    def __post_init__(self):
        d = check_finite(self.duration, "duration")
        if d < 0:
            raise InvalidArgumentError("ramp duration must be non-negative")

    @classmethod
    def from_terms(cls, duration, terms, paths=None):
        """``H(s) = sum_i f_i(s) M_i`` for ``terms = [(f_i, M_i), ...]``."""
        mats = [(f, np.asarray(m, dtype=complex)) for f, m in terms]

        def ham(s):
            return sum(f(s) * m for f, m in mats)

        def apply(s, y):
            return sum(f(s) * (m @ y) for f, m in mats)

        return cls(duration, ham, dict(paths or {}), apply)


@dataclass(frozen=True, eq=False)
class RampResult:
    state: np.ndarray
    s: np.ndarray
    fidelity: np.ndarray

    @property
    def final_fidelity(self):
        return float(self.fidelity[-1])


def _ground_projection(h, psi, tol=1e-9):
    w, v = np.linalg.eigh(h)
    g = v[:, w <= w[0] + tol * max(1.0, np.max(np.abs(w)))]
    return float(np.sum(np.abs(g.conj().T @ psi) ** 2))


def adiabatic_ramp(ramp, psi0, dt=None, samples=51, local_tol=1e-11):
    """Integrate ``i dpsi/dt = H(t/T) psi`` along a ramp and track the ground-state overlap.

    ``F(s)`` is the weight of the state in the ground space of ``H(s)``.
    ``dt`` caps the integrator step (default ``T/200``).
    """
    h0 = check_hermitian(ramp.hamiltonian(0.0), "initial Hamiltonian")
    psi = _as_state(psi0, h0.shape[0])
    f0 = _ground_projection(h0, psi)
    if f0 < 1 - 1e-6:
        warnings.warn(f"initial state has ground-space weight {f0:.6f}", RuntimeWarning, stacklevel=2)
    s_grid = np.linspace(0.0, 1.0, samples)
    T = float(ramp.duration)
    if T == 0:
        return RampResult(psi, np.array([1.0]), np.array([_ground_projection(ramp.hamiltonian(1.0), psi)]))
    dt = T / 200 if dt is None else dt

    apply = ramp.apply or (lambda s, y: ramp.hamiltonian(s) @ y)

    def rhs(t, y):
        return -1j * apply(t / T, y)

    times, states = integrate(rhs, psi, (0.0, T), dt, samples=s_grid * T, local_tol=local_tol)
    fid = np.array([_ground_projection(ramp.hamiltonian(t / T), s) for t, s in zip(times, states)])
    return RampResult(states[-1], times / T, fid)


# Extremes of the Bessel factors: J1 peaks at 0.5819 for alpha = 1.8412 and
# J0 reaches its minimum -0.4028 at alpha = 3.8317.
_ALPHA_J1_MAX = 1.8411837813406593
_ALPHA_J0_MIN = 3.8317059702075125


def rung_preparation_ramp(spec, rungs, sign, T, detuning=1.0, basis=None, setup_fraction=0.1):
    """Ramp preparing isolated rungs in their symmetric (``sign < 0``) or
    antisymmetric (``sign > 0``) superposition.

    All leg bonds are off and the rung hopping is ``g J0(alpha_A) J1(alpha_B)``.
    For a negative hopping ``alpha_A`` is first moved to the minimum of
    ``J0`` while ``alpha_B = 0`` keeps the hopping exactly zero (the first
    ``setup_fraction`` of the ramp).  Then ``alpha_B`` rises to the maximum
    of ``J1``, so the hopping grows monotonically and never changes sign on
    the way.  A B-site detuning ``detuning * (1 - smoothstep)`` makes
    ``a_A^dag|0>`` the unique starting ground state and is removed during
    the second stage.  The B-site drive phase is chosen so the dressed
    hopping is real.
    """
    rungs = tuple(rungs)
    basis = build_basis(spec, len(rungs)) if basis is None else basis
    n = spec.n_rungs
    alpha_a_end = _ALPHA_J0_MIN if sign < 0 else 0.0
    f = float(setup_fraction)
    if not 0 <= f < 1:
        raise InvalidArgumentError("setup_fraction must lie in [0, 1)")
    hop = np.zeros((2 * n, 2 * n))
    det = np.zeros((2 * n, 2 * n))
    for j in rungs:
        hop[j - 1, n + j - 1] = hop[n + j - 1, j - 1] = spec.g_rung[j - 1]
        det[n + j - 1, n + j - 1] = detuning
    hop_mb, det_mb = lift(hop, basis), lift(det, basis)

    def setup(s):
        return float(smoothstep(s / f)) if f > 0 else 1.0

    def main(s):
        return float(smoothstep((s - f) / (1 - f)))

    def alpha_a(s):
        return alpha_a_end * setup(s)

    def alpha_b(s):
        return _ALPHA_J1_MAX * main(s)

    def rung_scale(s):
        return float(bessel_j(0, alpha_a(s)) * bessel_j(1, alpha_b(s)))

    def detune(s):
        return 1.0 - main(s)

    ramp = RampSchedule.from_terms(
        T,
        [(rung_scale, hop_mb), (detune, det_mb)],
        {"alpha_A": alpha_a, "alpha_B": alpha_b, "detuning": lambda s: detuning * detune(s)},
    )
    return ramp, basis


def target_state(kind, basis, rung=5):
    """Ideal superposition prepared by :func:`prepare_superposition`."""
    if kind not in ("1S", "1AS", "2S", "2AS"):
        raise InvalidArgumentError(f"cannot prepare {kind!r}; expected 1S, 1AS, 2S or 2AS")
    return initial_state(kind, basis, rung)


def prepare_superposition(kind, spec, T=50.0, dt=None, rung=5, detuning=1.0):
    """Adiabatically prepare a rung superposition from ``a_A^dag|0>`` (and ``a_A(rung+1)^dag``).

    Returns ``(state, fidelity, basis)`` where the fidelity is measured
    against :func:`target_state`.  Times are in units of ``1/g``.
    """
    if kind not in ("1S", "1AS", "2S", "2AS"):
        raise InvalidArgumentError(f"cannot prepare {kind!r}; expected 1S, 1AS, 2S or 2AS")
    rungs = (rung,) if kind[0] == "1" else (rung, rung + 1)
    sign = -1.0 if kind in ("1S", "2S") else 1.0
    ramp, basis = rung_preparation_ramp(spec, rungs, sign, T, detuning)
    psi0 = basis_state(basis, *[("A", j) for j in rungs])
    result = adiabatic_ramp(ramp, psi0, dt)
    target = target_state(kind, basis, rung)
    fidelity = abs(np.vdot(target, result.state)) ** 2
    return result.state, float(fidelity), basis

