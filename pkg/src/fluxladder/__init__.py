"""Synthetic-gauge-field simulations of a driven two-leg hard-core boson ladder."""

from .bands import (
    BlochParams,
    band_eigenvector,
    band_energies,
    bloch_components,
    critical_flux,
    decompose_localized,
    kramers_q,
    lower_band_minima,
    sigma_z_expect,
)
from .couplings import (
    DriveSchedule,
    EffectiveCouplings,
    FluxPattern,
    bessel_j,
    effective_couplings,
    effective_hopping,
    frequency_ladder,
    hopping_phase,
    interleg_surface,
    synthesize_flux,
    uniform_couplings,
    validate_resonance,
)
from .dynamics import (
    RampSchedule,
    adiabatic_ramp,
    chiral_experiment,
    evolve_driven,
    evolve_effective,
    prepare_superposition,
    rwa_fidelity,
    short_time_law,
)
from .errors import (
    AccuracyError,
    DomainError,
    FluxLadderError,
    InvalidArgumentError,
    InvalidStateError,
    UnsupportedSectorError,
)
from .groundstate import chiral_current_scan, classify_phase, current_map, ground_states
from .lattice import (
    LadderSpec,
    SectorBasis,
    build_basis,
    build_driven_hamiltonian,
    build_effective_hamiltonian,
    gauge_transform,
    plaquette_flux,
    rotating_frame,
)
from .observables import (
    CurrentReport,
    analytic_currents,
    bond_current_operator,
    chiral_current_operator,
    delta_n,
    measure,
    rung_current_operator,
)

__version__ = "0.1.0"
