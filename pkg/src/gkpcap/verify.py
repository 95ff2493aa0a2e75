"""Cross-module consistency suite behind the command-line ``verify`` report.

Every check recomputes one identity along two independent routes (moment
algebra vs. truncated-Fock simulation, factored vs. direct channels,
tensor reshuffles vs. direct contraction, ...) and reports the worst
observed deviation against a fixed tolerance.  ``tol_scale`` multiplies
every tolerance; the test suite drives it toward zero to prove the
report actually gates on the measured errors rather than rubber-stamping.

All checks are deterministic: randomized instances draw from fixed seeds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import capacity, choi, fock, gaussian


@dataclass
class CheckResult:
    """One verification line: worst deviation measured against its bound."""

    name: str
    passed: bool
    error: float
    tol: float
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag}  {self.name:<38s} max deviation {self.error:9.3e}"
                f"  (tol {self.tol:8.1e}, {self.seconds:5.2f}s)")


def _spec_deviation(a: gaussian.ChannelSpec, b: gaussian.ChannelSpec) -> float:
    return max(np.abs(a.T - b.T).max(), np.abs(a.N - b.N).max(),
               np.abs(a.d - b.d).max())


_GRID_ETA = (0.55, 0.7, 0.85, 0.95)
_GRID_NTH = (0.0, 0.5, 1.0, 2.0)


def check_symplectic_dilations() -> tuple[float, float]:
    """Beam-splitter / two-mode-squeezer matrices preserve the symplectic
    form, and tracing out a thermal environment reproduces the attenuator."""
    om = np.kron(np.eye(2), gaussian.OMEGA)
    err = 0.0
    for eta in _GRID_ETA:
        S = gaussian.beam_splitter_symplectic(eta)
        err = max(err, np.abs(S @ om @ S.T - om).max())
        for nth in _GRID_NTH:
            reduced = gaussian.spec_from_dilation(
                S, gaussian.thermal_state_gaussian(nth))
            err = max(err, _spec_deviation(reduced, gaussian.loss_spec(eta, nth)))
    for G in (1.0, 1.5, 3.0):
        S = gaussian.two_mode_squeezer_symplectic(G)
        err = max(err, np.abs(S @ om @ S.T - om).max())
        reduced = gaussian.spec_from_dilation(S, gaussian.vacuum_state())
        err = max(err, _spec_deviation(reduced, gaussian.amp_spec(G)))
    return err, 1e-10


def check_split_loss_then_amp() -> tuple[float, float]:
    """Attenuator = amplifier applied after a pure-loss stage."""
    err = 0.0
    for eta in _GRID_ETA:
        for nth in _GRID_NTH:
            eta_p, G_p = gaussian.decompose_post_amp(eta, nth)
            recomposed = gaussian.compose(gaussian.amp_spec(G_p),
                                          gaussian.loss_spec(eta_p, 0.0))
            err = max(err, _spec_deviation(recomposed, gaussian.loss_spec(eta, nth)))
    return err, 1e-12


def check_split_amp_then_loss() -> tuple[float, float]:
    """Attenuator = pure-loss stage applied after an amplifier (when the
    split exists)."""
    err = 0.0
    for eta in _GRID_ETA:
        for nth in _GRID_NTH:
            try:
                eta_t, G_t = gaussian.decompose_pre_amp(eta, nth)
            except gaussian.DecompositionError:
                continue
            recomposed = gaussian.compose(gaussian.loss_spec(eta_t, 0.0),
                                          gaussian.amp_spec(G_t))
            err = max(err, _spec_deviation(recomposed, gaussian.loss_spec(eta, nth)))
    return err, 1e-12


def check_split_amp_sandwich() -> tuple[float, float]:
    """Attenuator = amplifier . pure loss . amplifier, swept over the
    interior first-stage gains."""
    err = 0.0
    for eta in _GRID_ETA:
        for nth in _GRID_NTH:
            gmax = 1.0 + (1.0 - eta) * nth
            for frac in (0.25, 0.5, 0.75):
                G1 = 1.0 + frac * (gmax - 1.0)
                try:
                    G1, eta_bar, G2 = gaussian.decompose_general(eta, nth, G1)
                except gaussian.DecompositionError:
                    continue
                recomposed = gaussian.compose(
                    gaussian.amp_spec(G1),
                    gaussian.compose(gaussian.loss_spec(eta_bar, 0.0),
                                     gaussian.amp_spec(G2)))
                err = max(err, _spec_deviation(recomposed,
                                               gaussian.loss_spec(eta, nth)))
    return err, 1e-12


def check_loss_amp_displacement() -> tuple[float, float]:
    """Amplifying an attenuator back to unit transmissivity leaves a pure
    random-displacement channel, with the variance set by the order."""
    err = 0.0
    for eta in (0.5, 0.8):
        for nth in (0.0, 1.0):
            post = gaussian.compose(gaussian.amp_spec(1.0 / eta),
                                    gaussian.loss_spec(eta, nth))
            err = max(err, _spec_deviation(post, gaussian.displacement_noise_spec(
                gaussian.loss_then_amp_sigma2(eta, nth))))
            pre = gaussian.compose(gaussian.loss_spec(eta, nth),
                                   gaussian.amp_spec(1.0 / eta))
            err = max(err, _spec_deviation(pre, gaussian.displacement_noise_spec(
                gaussian.amp_then_loss_sigma2(eta, nth))))
    return err, 1e-12


def check_coherent_state_moments() -> tuple[float, float]:
    """Coherent amplitudes and the displacement operator acting on vacuum
    agree with each other and with the moment-level description."""
    err = 0.0
    for alpha in (0.7 + 0.3j, -1.1j, 0.5):
        vec_a = fock.coherent_state(alpha, 40)
        vec_b = fock.displacement_op(alpha, 40) @ fock.fock_state(0, 40)
        err = max(err, np.abs(vec_a - vec_b).max())
        ref = gaussian.coherent_state_gaussian(alpha)
        for vec in (vec_a, vec_b):
            got = fock.moments(np.outer(vec, vec.conj()))
            err = max(err, np.abs(got.xbar - ref.xbar).max(),
                      np.abs(got.V - ref.V).max())
    return err, 1e-10


def check_displacement_composition() -> tuple[float, float]:
    """Composing two displacements equals the summed displacement times
    the antisymmetric phase, on the half of the space safe from cutoff."""
    n, keep = 60, 30
    err = 0.0
    for a, b in ((1.0, 1.0j), (0.5 - 0.2j, -0.3 + 0.8j)):
        lhs = fock.displacement_op(a, n) @ fock.displacement_op(b, n)
        rhs = np.exp(1j * np.imag(a * np.conj(b))) * fock.displacement_op(a + b, n)
        err = max(err, np.abs(lhs[:keep, :keep] - rhs[:keep, :keep]).max())
    return err, 1e-7


def check_pure_loss_kraus_vs_dilation() -> tuple[float, float]:
    """The damping Kraus family equals the beam-splitter dilation with a
    vacuum environment, applied to a coherent-plus-Fock test state."""
    n, eta = 40, 0.75
    vec = fock.coherent_state(1.0 + 0.5j, n) + 0.6 * fock.fock_state(2, n)
    rho = fock.FockDensity.from_unnormalized(np.outer(vec, vec.conj()))
    via_kraus = fock.apply_kraus(fock.pure_loss_kraus(eta, n), rho)
    via_dilation = fock.thermal_loss_apply(eta, 0.0, rho, n_env=n)
    err = np.abs(via_kraus.data - via_dilation.data).max()
    return err, 1e-9


def check_thermal_loss_moments() -> tuple[float, float]:
    """Thermal attenuation simulated in Fock space reproduces the moment
    algebra on a coherent input."""
    eta, nth = 0.8, 0.5
    rho = fock.FockDensity.from_unnormalized(
        np.outer(fock.coherent_state(1.0, 40), fock.coherent_state(1.0, 40).conj()))
    out = fock.thermal_loss_apply(eta, nth, rho, n_env=24)
    got = fock.moments(out)
    ref = gaussian.apply_channel(gaussian.loss_spec(eta, nth),
                                 gaussian.coherent_state_gaussian(1.0))
    err = max(np.abs(got.xbar - ref.xbar).max(), np.abs(got.V - ref.V).max())
    return err, 1e-6


def check_random_displacement_covariance() -> tuple[float, float]:
    """Gaussian random displacement of variance s^2 adds s^2 to each
    quadrature variance of the vacuum."""
    sigma2 = 0.25
    dim = fock.required_dim(6.0 * math.sqrt(sigma2))
    rho = fock.FockDensity.from_unnormalized(
        np.outer(fock.fock_state(0, dim), fock.fock_state(0, dim)))
    out = fock.random_displacement_apply(sigma2, rho)
    got = fock.moments(out)
    err = max(np.abs(got.xbar).max(),
              np.abs(got.V - (0.5 + sigma2) * np.eye(2)).max())
    return err, 1e-5


def _random_kraus(dim_in: int, dim_out: int, rank: int,
                  rng: np.random.Generator) -> list[np.ndarray]:
    """Random channel with exact Kraus completeness via polar normalization."""
    blocks = (rng.standard_normal((rank, dim_out, dim_in))
              + 1j * rng.standard_normal((rank, dim_out, dim_in)))
    gram = np.einsum("kji,kjl->il", blocks.conj(), blocks)
    w, V = np.linalg.eigh(gram)
    inv_sqrt = (V / np.sqrt(w)) @ V.conj().T
    return [B @ inv_sqrt for B in blocks]


def check_superoperator_composition() -> tuple[float, float]:
    """Concatenating channels multiplies their transfer matrices, and
    matches composing the process matrices directly."""
    rng = np.random.default_rng(7)
    first = choi.choi_from_kraus(_random_kraus(3, 4, 2, rng), 3, 4)
    second = choi.choi_from_kraus(_random_kraus(4, 2, 3, rng), 4, 2)
    chained = choi.compose_choi(second, first)
    T_direct = choi.choi_to_superop(chained).T
    T_product = choi.choi_to_superop(second).T @ choi.choi_to_superop(first).T
    err = np.abs(T_direct - T_product).max()
    # same identity exercised through the action on a random state
    rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rho = rho @ rho.conj().T
    rho /= np.trace(rho)
    err = max(err, np.abs(chained.apply(rho)
                          - second.apply(first.apply(rho))).max())
    return err, 1e-9


def check_reshuffle_roundtrip() -> tuple[float, float]:
    """Process-matrix to transfer-matrix reshuffling is an exact involution."""
    rng = np.random.default_rng(11)
    X = choi.choi_from_kraus(_random_kraus(3, 5, 4, rng), 3, 5)
    back = choi.superop_to_choi(choi.choi_to_superop(X))
    err = np.abs(back.X - X.X).max()
    return err, 1e-14


def check_unitary_superoperator() -> tuple[float, float]:
    """A unitary conjugation's transfer matrix is the unitary tensored
    with its own conjugate."""
    rng = np.random.default_rng(13)
    H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = (H + H.conj().T) / 2.0
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(1j * w)) @ V.conj().T
    T = choi.choi_to_superop(choi.choi_from_kraus([U], 4, 4)).T
    err = np.abs(T - np.kron(U, U.conj())).max()
    return err, 1e-12


def check_identity_fidelity() -> tuple[float, float]:
    """Entanglement fidelity is 1 for identity encode/noise/decode and
    1/d^2 for a decoder that discards everything into one state."""
    d = 3
    ident = choi.identity_choi(d)
    err = abs(choi.entanglement_fidelity(ident, ident, ident, d) - 1.0)
    discard = np.zeros((d, d, d, d), dtype=complex)
    for i in range(d):
        discard[i, 0, i, 0] = 1.0
    X_discard = choi.ChoiMatrix(discard.reshape(d * d, d * d), d, d)
    err = max(err, abs(choi.entanglement_fidelity(ident, ident, X_discard, d)
                       - 1.0 / d ** 2))
    return err, 1e-12


def check_capacity_dual_route() -> tuple[float, float]:
    """The optimized and closed-form routes to the amplifier-first
    data-processing bound agree."""
    err = 0.0
    for eta in (0.7, 0.9):
        for nth in (0.0, 0.5):
            for nbar in (1.0, 10.0):
                err = max(err, abs(capacity.idp_bound(eta, nth, nbar)
                                   - capacity.idp_bound_closed_form(eta, nth, nbar)))
    return err, 1e-12


def check_achievable_rate_reduction() -> tuple[float, float]:
    """The lattice-code rate through an attenuator equals the rate through
    the random-displacement channel left after pre-amplification."""
    err = 0.0
    for eta in (0.9, 0.95, 0.99):
        for nth in (0.0, 0.5):
            sigma2 = gaussian.amp_then_loss_sigma2(eta, nth)
            err = max(err, abs(capacity.gkp_rate_loss(eta, nth)
                               - capacity.gkp_rate_displacement(sigma2)))
    return err, 1e-12


_CHECKS = [
    ("symplectic-dilation-matrices", check_symplectic_dilations),
    ("attenuator-split-loss-then-amp", check_split_loss_then_amp),
    ("attenuator-split-amp-then-loss", check_split_amp_then_loss),
    ("attenuator-split-amp-sandwich", check_split_amp_sandwich),
    ("loss-amp-displacement-reduction", check_loss_amp_displacement),
    ("coherent-state-moments", check_coherent_state_moments),
    ("displacement-composition-phase", check_displacement_composition),
    ("pure-loss-kraus-vs-dilation", check_pure_loss_kraus_vs_dilation),
    ("thermal-loss-moments-vs-gaussian", check_thermal_loss_moments),
    ("random-displacement-covariance", check_random_displacement_covariance),
    ("superoperator-composition", check_superoperator_composition),
    ("choi-reshuffle-roundtrip", check_reshuffle_roundtrip),
    ("unitary-channel-superoperator", check_unitary_superoperator),
    ("entanglement-fidelity-anchors", check_identity_fidelity),
    ("capacity-bound-dual-route", check_capacity_dual_route),
    ("achievable-rate-reduction", check_achievable_rate_reduction),
]


def run_checks(tol_scale: float = 1.0) -> list[CheckResult]:
    """Run every registered check; a check passes iff its measured error
    is strictly below ``tol_scale`` times its tolerance."""
    results = []
    for name, fn in _CHECKS:
        t0 = time.perf_counter()
        err, tol = fn()
        dt = time.perf_counter() - t0
        scaled = tol * tol_scale
        results.append(CheckResult(name, bool(err < scaled), float(err),
                                   float(scaled), dt))
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed"
                 + (f", {n_fail} FAILED" if n_fail else ""))
    return "\n".join(lines)


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
