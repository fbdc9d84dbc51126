"""Acceptance suite: one group of checks per criterion, summarized at the end of the run."""

import math
import time

import numpy as np
import pytest

from fluxladder.bands import (
    BlochParams,
    band_eigenvector,
    band_energies,
    bloch_matrix,
    critical_flux,
    kramers_q,
    lower_band_minima,
)
from fluxladder.couplings import (
    EffectiveCouplings,
    FluxPattern,
    drive_schedule,
    effective_couplings,
    synthesize_flux,
    uniform_couplings,
)
from fluxladder.dynamics import (
    chiral_experiment,
    evolve_driven,
    evolve_effective,
    prepare_superposition,
    rwa_fidelity,
    short_time_law,
)
from fluxladder.groundstate import chiral_current_scan, ground_states, kramers_combination, uniform_t0
from fluxladder.lattice import (
    LadderSpec,
    basis_state,
    build_basis,
    build_driven_hamiltonian,
    build_effective_hamiltonian,
    gauge_transform,
    plaquette_fluxes,
)
from fluxladder.observables import analytic_currents, measure

criterion = pytest.mark.criterion


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f} s, limit {self.limit} s"


def flip_point(lo, hi):
    """Bisect the flux at which the numeric lower-band minimum count changes."""
    count = lambda phi: len(lower_band_minima(BlochParams(1.0, phi), "numeric"))  # noqa: E731
    assert count(lo) == 1 and count(hi) == 2
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if count(mid) == 1 else (lo, mid)
    return 0.5 * (lo + hi)


# 1. critical flux ---------------------------------------------------------------------------

C1 = (1, "critical flux and the one-to-two minima transition")


@criterion(*C1)
def test_c1_decimal_value():
    with Timer(1.0):
        assert critical_flux() == pytest.approx(1.349486, abs=1e-9)


@criterion(*C1)
def test_c1_closed_form():
    with Timer(1.0):
        assert critical_flux() == pytest.approx(2 * math.acos(math.sqrt(17) / 4 - 0.25), abs=1e-9)


@criterion(*C1)
def test_c1_numeric_minima_flip_within_window():
    with Timer(1.0):
        pc = critical_flux()
        assert len(lower_band_minima(BlochParams(1.0, pc - 5e-5), "numeric")) == 1
        assert len(lower_band_minima(BlochParams(1.0, pc + 5e-5), "numeric")) == 2
        assert abs(flip_point(pc - 5e-5, pc + 5e-5) - pc) < 5e-5


# 2. band oracle -----------------------------------------------------------------------------

@criterion(2, "band energies against 2x2 eigensolves, k -> -k symmetry")
def test_c2_band_oracle():
    with Timer(1.0):
        rng = np.random.default_rng(2)
        ks = np.linspace(-np.pi, np.pi, 512)
        for phi in rng.uniform(-np.pi, np.pi, 20):
            p = BlochParams(1.0, phi)
            lo, up = band_energies(p, ks)
            direct = np.array([np.linalg.eigvalsh(bloch_matrix(p, k)) for k in ks])
            assert np.max(np.abs(direct[:, 0] - lo)) <= 1e-12
            assert np.max(np.abs(direct[:, 1] - up)) <= 1e-12
            lo_m, up_m = band_energies(p, -ks)
            assert np.max(np.abs(lo_m - lo)) <= 1e-12 and np.max(np.abs(up_m - up)) <= 1e-12


# 3. Meissner regime -------------------------------------------------------------------------

@criterion(3, "Meissner chiral current and vanishing rung currents at N=50")
def test_c3_meissner():
    with Timer(10.0):
        n = 50
        spec = LadderSpec.uniform(n, boundary="periodic")
        t0 = uniform_t0(spec)
        basis = build_basis(spec, 1)
        for phi in (0.05 * np.pi, 0.1 * np.pi, 0.2 * np.pi):
            c = uniform_couplings(n, t0, phi, "periodic")
            w, v = ground_states(build_effective_hamiltonian(c, basis))
            assert w.size == 1
            r = measure(v[:, 0], c, basis)
            expected = 2 * t0 * math.sin(phi / 2)
            assert abs(r.chiral - expected) <= 0.02 * abs(expected)
            assert np.max(np.abs(r.rung)) <= 1e-8


# 4. vortex regime ---------------------------------------------------------------------------

C4 = (4, "vortex rung-current profile and leg antisymmetry at N=50, phi=0.9pi")


def vortex_report():
    n, phi = 50, 0.9 * np.pi
    spec = LadderSpec.uniform(n, boundary="periodic")
    t0 = uniform_t0(spec)
    c = uniform_couplings(n, t0, phi, "periodic")
    basis = build_basis(spec, 1)
    _, v = ground_states(build_effective_hamiltonian(c, basis))
    state, k = kramers_combination(n, t0, phi, v)
    return measure(state, c, basis), k


def correlation(a, b):
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


@criterion(*C4)
def test_c4_profile_matches_infinite_ladder_wavevector():
    with Timer(10.0):
        r, _ = vortex_report()
        j = np.arange(1, 51)
        q = kramers_q(0.9 * np.pi)
        assert abs(correlation(r.rung, np.sin(2 * q * j))) >= 0.99


@criterion(*C4)
def test_c4_profile_matches_finite_size_wavevector():
    with Timer(10.0):
        r, k = vortex_report()
        j = np.arange(1, 51)
        assert abs(correlation(r.rung, np.sin(2 * (np.pi - k) * j))) >= 0.99


@criterion(*C4)
def test_c4_leg_currents_antisymmetric():
    with Timer(10.0):
        r, _ = vortex_report()
        assert np.max(np.abs(r.leg_a + r.leg_b)) <= 1e-10


# 5. convergence of the single-excitation scan -----------------------------------------------

@criterion(5, "single-excitation scan converges to the analytic curve, peak near phi_c")
def test_c5_convergence():
    with Timer(60.0):
        grid = np.pi * np.arange(1, 51) / 50
        deviations = []
        for n in (10, 20, 50):
            scan = chiral_current_scan(LadderSpec.uniform(n, boundary="periodic"), 1.0, grid)
            numeric = np.array([p.chiral for p in scan])
            analytic = np.array([p.analytic for p in scan])
            deviations.append(float(np.max(np.abs(numeric - analytic))))
        assert deviations[0] > deviations[1] > deviations[2]
        assert abs(grid[int(np.argmax(numeric))] - critical_flux()) <= grid[1] - grid[0]


# 6. two-excitation scan ---------------------------------------------------------------------

def single_peaked(values, tol=1e-10):
    top = int(np.argmax(values))
    rising = np.all(np.diff(values[: top + 1]) >= -tol)
    falling = np.all(np.diff(values[top:]) <= tol)
    return bool(rising and falling)


@criterion(6, "two-excitation scan is single peaked and vanishes as phi -> 0+")
def test_c6_two_excitation_shape():
    with Timer(120.0):
        grid = np.pi * np.arange(1, 51) / 50
        for n in (10, 20):
            spec = LadderSpec.uniform(n, boundary="open")
            values = np.array([p.chiral for p in chiral_current_scan(spec, 1.0, grid, n_exc=2)])
            assert single_peaked(values)
            tiny = chiral_current_scan(spec, 1.0, [1e-6], n_exc=2)[0].chiral
            assert abs(tiny) <= 1e-5 * np.max(np.abs(values))


# 7. chiral dynamics -------------------------------------------------------------------------

C7 = (7, "chiral dynamics sign pattern at N=10, phi=0.5pi, t=1")


def chiral_deltas(kind):
    spec = LadderSpec.uniform(10, boundary="open")
    snap = chiral_experiment(kind, spec, 0.5 * np.pi, [1.0])[0]
    return snap.delta_a, snap.delta_b


@criterion(*C7)
@pytest.mark.parametrize("kind", ["1S", "2S"])
def test_c7_symmetric_starts(kind):
    with Timer(10.0):
        da, db = chiral_deltas(kind)
        assert da > 0 > db, f"delta_n_A={da:.4g}, delta_n_B={db:.4g}"


@criterion(*C7)
@pytest.mark.parametrize("kind", ["1AS", "2AS"])
def test_c7_antisymmetric_starts(kind):
    with Timer(10.0):
        da, db = chiral_deltas(kind)
        assert db > 0 > da, f"delta_n_A={da:.4g}, delta_n_B={db:.4g}"


@criterion(*C7)
@pytest.mark.parametrize("kind", ["1E", "2E"])
def test_c7_single_leg_starts(kind):
    with Timer(10.0):
        da, db = chiral_deltas(kind)
        assert abs(da) <= 1e-10 and abs(db) <= 1e-10, f"delta_n_A={da:.3g}, delta_n_B={db:.3g}"


# 8. short-time law --------------------------------------------------------------------------

@criterion(8, "short-time cubic coefficient equals sin(phi)")
@pytest.mark.parametrize("phi", [0.25 * np.pi, 0.5 * np.pi, 0.75 * np.pi])
def test_c8_short_time(phi):
    with Timer(10.0):
        spec = LadderSpec.uniform(10, boundary="open")
        fit = short_time_law("1S", spec, phi, [0.02, 0.04, 0.06, 0.08, 0.1])
        ratio = fit.coefficient / math.sin(phi)
        assert abs(ratio - 1) <= 0.02, f"coefficient / sin(phi) = {ratio:.4f}"


# 9. rotating-wave validation ----------------------------------------------------------------

@criterion(9, "driven model follows the effective model in the rotating frame")
def test_c9_rwa():
    with Timer(120.0):
        spec = LadderSpec.uniform(2, boundary="open")
        phases, _ = synthesize_flux(FluxPattern("uniform", 0.5 * np.pi), spec)
        psi0 = basis_state(build_basis(spec, 1), ("A", 1))
        T = 2.0 / uniform_t0(spec)
        minima = {}
        for ratio in (10.0, 20.0, 40.0):
            sched = drive_schedule(spec, phases, u=ratio, spread=4.25)
            trace = rwa_fidelity(spec, sched, effective_couplings(spec, sched), psi0, T, samples=21)
            minima[ratio] = trace.minimum
        assert minima[20.0] >= 0.99
        assert minima[10.0] < minima[20.0] < minima[40.0]


# 10. preparation ----------------------------------------------------------------------------

@criterion(10, "adiabatic preparation of rung superpositions")
@pytest.mark.parametrize("kind", ["1S", "1AS"])
def test_c10_preparation(kind):
    with Timer(60.0):
        spec = LadderSpec.uniform(10, boundary="open")
        fids = [prepare_superposition(kind, spec, T=T)[1] for T in (25.0, 50.0, 100.0)]
        assert fids[1] >= 0.99
        assert fids[0] <= fids[1] + 1e-8 and fids[1] <= fids[2] + 1e-8


# 11. structural suite -----------------------------------------------------------------------

C11 = (11, "structural invariants")


def random_couplings(rng, n):
    return EffectiveCouplings(rng.uniform(-1, 1, (2, n)), rng.uniform(-np.pi, np.pi, (2, n)),
                              rng.uniform(-1, 1, n), rng.uniform(-np.pi, np.pi, n), "periodic")


@criterion(*C11)
def test_c11_hermiticity():
    rng = np.random.default_rng(11)
    spec = LadderSpec.uniform(4, boundary="open")
    sched = drive_schedule(spec, rng.uniform(-3, 3, (2, 4)), u=5.0, omega_base=2.0)
    for n_exc in (1, 2):
        basis = build_basis(spec, n_exc)
        h = build_effective_hamiltonian(random_couplings(rng, 4), build_basis(4, n_exc))
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12
        hd = build_driven_hamiltonian(spec, sched, basis, 0.77)
        assert np.max(np.abs(hd - hd.conj().T)) <= 1e-12


@criterion(*C11)
def test_c11_norm_conservation():
    rng = np.random.default_rng(12)
    basis = build_basis(6, 2)
    psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    psi /= np.linalg.norm(psi)
    h = build_effective_hamiltonian(random_couplings(rng, 6), basis)
    assert abs(np.linalg.norm(evolve_effective(h, psi, 10.0)) - 1) <= 1e-12
    spec = LadderSpec.uniform(3, boundary="open")
    sched = drive_schedule(spec, u=10.0, omega_base=3.0)
    out = evolve_driven(spec, sched, basis_state(build_basis(spec, 1), ("A", 1)), 2.0,
                        (2 * np.pi / float(np.max(sched.frequency))) / 40)
    assert abs(np.linalg.norm(out) - 1) <= 1e-8


@criterion(*C11)
def test_c11_excitation_number_conservation():
    from fluxladder.lattice import fock_basis, lift, single_particle_hamiltonian

    rng = np.random.default_rng(13)
    c = random_couplings(rng, 3)
    fb = fock_basis(3)
    h = lift(single_particle_hamiltonian(c), fb)
    counts = np.array([len(cfg) for cfg in fb.configs])
    assert np.all(h[counts[:, None] != counts[None, :]] == 0)


@criterion(*C11)
def test_c11_gauge_spectrum_invariance():
    rng = np.random.default_rng(14)
    for n_exc in (1, 2):
        c = random_couplings(rng, 5)
        g = gauge_transform(c, rng.uniform(-np.pi, np.pi, 10))
        basis = build_basis(5, n_exc)
        w1 = np.linalg.eigvalsh(build_effective_hamiltonian(c, basis))
        w2 = np.linalg.eigvalsh(build_effective_hamiltonian(g, basis))
        assert np.max(np.abs(w1 - w2)) <= 1e-10
        d = np.angle(np.exp(1j * (plaquette_fluxes(g) - plaquette_fluxes(c))))
        assert np.max(np.abs(d)) <= 1e-12


@criterion(*C11)
def test_c11_flux_round_trip():
    spec = LadderSpec.uniform(9, boundary="open")
    for kind, phi in (("uniform", 0.5 * np.pi), ("staggered", 1.1), ("linear", 0.3)):
        pattern = FluxPattern(kind, phi)
        _, c = synthesize_flux(pattern, spec)
        d = np.angle(np.exp(1j * (plaquette_fluxes(c) - pattern.fluxes(8))))
        assert np.max(np.abs(d)) <= 1e-12


@criterion(*C11)
def test_c11_band_eigenvector_identities():
    ks = np.linspace(-np.pi, np.pi, 257)
    for phi in (0.1, 1.0, 0.9 * np.pi, -2.0):
        p = BlochParams(1.0, phi)
        al, bl = band_eigenvector(p, ks)
        au, bu = band_eigenvector(p, ks, "upper")
        al_m, _ = band_eigenvector(p, -ks)
        assert np.max(np.abs(au - bl)) <= 1e-12
        assert np.max(np.abs(bu + al)) <= 1e-12
        assert np.max(np.abs(al_m + bl)) <= 1e-12
