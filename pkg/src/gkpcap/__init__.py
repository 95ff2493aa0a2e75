"""Capacity bounds and grid-code studies for one-mode Gaussian loss channels.

Modules
-------
gaussian   phase-space channel algebra (loss, amplification, added noise)
capacity   achievable rates and upper bounds for thermal-loss channels
fock       truncated number-basis states, channels, and Wigner functions
gkp        grid-code construction, decoding, and Monte-Carlo error rates
choi       process matrices, composition, and entanglement fidelity
biconvex   alternating-SDP search over encoder/decoder process matrices
plotting   figure rendering for every CLI artifact
verify     cross-module consistency checks
cli        command-line entry point (`gkpcap`)
"""

from .gaussian import (
    ChannelSpec,
    GaussianState,
    amp_spec,
    amp_then_loss_sigma2,
    apply_channel,
    compose,
    decompose_general,
    decompose_post_amp,
    decompose_pre_amp,
    displacement_noise_spec,
    loss_spec,
    loss_then_amp_sigma2,
    rotation_spec,
    spec_from_dilation,
)
from .capacity import (
    BoundPoint,
    bound_point,
    crossover_eta_star,
    displacement_bounds,
    dp_bound,
    g_entropy,
    gkp_rate_displacement,
    gkp_rate_loss,
    hw_bound,
    idp_bound,
    idp_bound_closed_form,
    odp_bound,
    pure_loss_capacity,
    thermal_loss_ci_lower,
)
from .fock import (
    FockDensity,
    TruncationError,
    coherent_state,
    dephase,
    fock_state,
    mean_photon,
    required_dim,
    thermal_density,
    wigner,
    wigner_gaussian,
)
from .gkp import (
    FiniteEnergyGkp,
    GkpLattice,
    delta_for_mean_photon,
    finite_energy_codewords,
    hexagonal_lattice,
    logical_error_closed_form,
    mc_logical_error,
    square_lattice,
)
from .choi import (
    ChoiMatrix,
    average_output_state,
    choi_from_kraus,
    compose_choi,
    entanglement_fidelity,
)
from .biconvex import (
    OptimizationConfig,
    OptimizationTrace,
    SolverFailure,
    alternate_optimize,
)

__all__ = [
    "ChannelSpec", "GaussianState", "amp_spec", "amp_then_loss_sigma2",
    "apply_channel", "compose", "decompose_general", "decompose_post_amp",
    "decompose_pre_amp", "displacement_noise_spec", "loss_spec",
    "loss_then_amp_sigma2", "rotation_spec", "spec_from_dilation",
    "BoundPoint", "bound_point", "crossover_eta_star", "displacement_bounds",
    "dp_bound", "g_entropy", "gkp_rate_displacement", "gkp_rate_loss",
    "hw_bound", "idp_bound", "idp_bound_closed_form", "odp_bound",
    "pure_loss_capacity", "thermal_loss_ci_lower",
    "FockDensity", "TruncationError", "coherent_state", "dephase",
    "fock_state", "mean_photon", "required_dim", "thermal_density",
    "wigner", "wigner_gaussian",
    "FiniteEnergyGkp", "GkpLattice", "delta_for_mean_photon",
    "finite_energy_codewords", "hexagonal_lattice",
    "logical_error_closed_form", "mc_logical_error", "square_lattice",
    "ChoiMatrix", "average_output_state", "choi_from_kraus", "compose_choi",
    "entanglement_fidelity",
    "OptimizationConfig", "OptimizationTrace", "SolverFailure",
    "alternate_optimize",
]
