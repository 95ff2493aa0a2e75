"""Moment-level algebra of one-mode Gaussian channels.

A one-mode Gaussian channel is the triple (T, N, d) acting on quadrature
means and covariances as

    xbar -> T xbar + d,        V -> T V T^t + N.

Quadratures are ordered x = (q, p) with q = (a + a^dag)/sqrt(2) and
p = i(a^dag - a)/sqrt(2), so the vacuum covariance is I/2 and the
commutation matrix is omega = [[0, 1], [-1, 0]].  All helpers in this
module stay at the level of first and second moments; the truncated
Fock-space counterparts live in :mod:`gkpcap.fock` and are used to
cross-check these maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])

# complete-positivity slack allowed on the matrix inequality
# N + (i/2)(omega - T omega T^t) >= 0
_CP_TOL = 1e-10


class DecompositionError(ValueError):
    """Requested amplifier/loss decomposition does not exist."""


@dataclass
class ChannelSpec:
    """One-mode Gaussian channel (T, N, d) on quadrature moments."""

    T: np.ndarray
    N: np.ndarray
    d: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float).reshape(2, 2)
        self.N = np.asarray(self.N, dtype=float).reshape(2, 2)
        self.d = np.asarray(self.d, dtype=float).reshape(2)

    def validate(self, tol: float = _CP_TOL) -> None:
        """Check N symmetric and the complete-positivity inequality."""
        if not np.allclose(self.N, self.N.T, atol=tol):
            raise ValueError("noise matrix N must be symmetric")
        # N + (i/2)(omega - T omega T^t) is Hermitian; CP demands it be PSD
        herm = self.N + 0.5j * (OMEGA - self.T @ OMEGA @ self.T.T)
        w = np.linalg.eigvalsh(herm)
        if w.min() < -tol:
            raise ValueError(f"channel violates complete positivity: min eig {w.min():.3e}")


@dataclass
class GaussianState:
    """First and second moments (xbar, V) of a one-mode Gaussian state."""

    xbar: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.xbar = np.asarray(self.xbar, dtype=float).reshape(2)
        self.V = np.asarray(self.V, dtype=float).reshape(2, 2)

    def validate(self, tol: float = _CP_TOL) -> None:
        """Uncertainty relation V + (i/2) omega >= 0."""
        if not np.allclose(self.V, self.V.T, atol=tol):
            raise ValueError("covariance must be symmetric")
        w = np.linalg.eigvalsh(self.V + 0.5j * OMEGA)
        if w.min() < -tol:
            raise ValueError(f"covariance violates the uncertainty relation: min eig {w.min():.3e}")


def vacuum_state() -> GaussianState:
    return GaussianState(np.zeros(2), 0.5 * np.eye(2))


def thermal_state_gaussian(nth: float) -> GaussianState:
    if nth < 0:
        raise ValueError("mean thermal photon number must be >= 0")
    return GaussianState(np.zeros(2), (nth + 0.5) * np.eye(2))


def coherent_state_gaussian(alpha: complex) -> GaussianState:
    xbar = math.sqrt(2.0) * np.array([np.real(alpha), np.imag(alpha)])
    return GaussianState(xbar, 0.5 * np.eye(2))


def loss_spec(eta: float, nth: float = 0.0) -> ChannelSpec:
    """Thermal attenuator: T = sqrt(eta) I, N = (1 - eta)(nth + 1/2) I."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    return ChannelSpec(math.sqrt(eta) * np.eye(2), (1.0 - eta) * (nth + 0.5) * np.eye(2))


def amp_spec(G: float) -> ChannelSpec:
    """Quantum-limited amplifier: T = sqrt(G) I, N = (G - 1)/2 I."""
    if G < 1.0:
        raise ValueError("amplifier gain must be >= 1")
    return ChannelSpec(math.sqrt(G) * np.eye(2), (G - 1.0) / 2.0 * np.eye(2))


def displacement_noise_spec(sigma2: float) -> ChannelSpec:
    """Random Gaussian displacement: T = I, N = sigma^2 I."""
    if sigma2 < 0:
        raise ValueError("displacement variance must be >= 0")
    return ChannelSpec(np.eye(2), sigma2 * np.eye(2))


def rotation_spec(theta: float) -> ChannelSpec:
    """Phase-space rotation by theta (noiseless, counterclockwise)."""
    c, s = math.cos(theta), math.sin(theta)
    return ChannelSpec(np.array([[c, -s], [s, c]]), np.zeros((2, 2)))


def identity_spec() -> ChannelSpec:
    return ChannelSpec(np.eye(2), np.zeros((2, 2)))


def compose(second: ChannelSpec, first: ChannelSpec) -> ChannelSpec:
    """Concatenation second(first(.)) on moments.

    T = T2 T1, N = T2 N1 T2^t + N2, d = T2 d1 + d2.
    """
    T = second.T @ first.T
    N = second.T @ first.N @ second.T.T + second.N
    d = second.T @ first.d + second.d
    return ChannelSpec(T, N, d)


def apply_channel(spec: ChannelSpec, state: GaussianState) -> GaussianState:
    """Push a Gaussian state through a channel at the moment level."""
    return GaussianState(spec.T @ state.xbar + spec.d, spec.T @ state.V @ spec.T.T + spec.N)


def beam_splitter_symplectic(eta: float) -> np.ndarray:
    """Two-mode beam-splitter symplectic with transmissivity eta.

    Ordering (q1, p1, q2, p2); the first mode is the system.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    c, s = math.sqrt(eta), math.sqrt(1.0 - eta)
    I2 = np.eye(2)
    return np.block([[c * I2, s * I2], [-s * I2, c * I2]])


def two_mode_squeezer_symplectic(G: float) -> np.ndarray:
    """Two-mode squeezer symplectic with gain G >= 1."""
    if G < 1.0:
        raise ValueError("gain must be >= 1")
    I2 = np.eye(2)
    Z2 = np.diag([1.0, -1.0])
    c, s = math.sqrt(G), math.sqrt(G - 1.0)
    return np.block([[c * I2, s * Z2], [s * Z2, c * I2]])


def is_symplectic(S: np.ndarray, tol: float = 1e-10) -> bool:
    """S Omega S^t = Omega for the direct-sum Omega of n modes."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    Om = np.kron(np.eye(n), OMEGA)
    return bool(np.allclose(S @ Om @ S.T, Om, atol=tol))


def spec_from_dilation(S: np.ndarray, env: GaussianState,
                       dx: np.ndarray | None = None) -> ChannelSpec:
    """Reduce a two-mode symplectic dilation to the system channel.

    Partitioning S into 2x2 blocks [[S_xx, S_xy], [S_yx, S_yy]] and
    tracing out the environment (state ``env``) gives

        T = S_xx, N = S_xy V_env S_xy^t, d = S_xy ybar_env + dx.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (4, 4):
        raise ValueError("dilation symplectic must be 4x4 (system + one environment mode)")
    if not is_symplectic(S):
        raise ValueError("dilation matrix is not symplectic")
    Sxx, Sxy = S[:2, :2], S[:2, 2:]
    dx = np.zeros(2) if dx is None else np.asarray(dx, dtype=float).reshape(2)
    return ChannelSpec(Sxx, Sxy @ env.V @ Sxy.T, Sxy @ env.xbar + dx)


def loss_then_amp_sigma2(eta: float, nth: float) -> float:
    """Displacement variance after amplifying a thermal attenuator by 1/eta."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must lie in (0, 1]")
    return (1.0 - eta) / eta * (nth + 1.0)


def amp_then_loss_sigma2(eta: float, nth: float) -> float:
    """Displacement variance when the 1/eta amplifier precedes the attenuator."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must lie in (0, 1]")
    return (1.0 - eta) * (nth + 1.0)


def decompose_post_amp(eta: float, nth: float) -> tuple[float, float]:
    """Split a thermal attenuator as amplifier after pure loss.

    Returns (eta', G') with N[eta, nth] = A[G'] . N[eta', 0],
    eta' = eta / ((1 - eta) nth + 1) and G' = (1 - eta) nth + 1.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must lie in (0, 1]")
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    Gp = (1.0 - eta) * nth + 1.0
    return eta / Gp, Gp


def decompose_pre_amp(eta: float, nth: float) -> tuple[float, float]:
    """Split a thermal attenuator as pure loss after amplifier.

    Returns (eta~', G~') with N[eta, nth] = N[eta~', 0] . A[G~'],
    eta~' = eta - (1 - eta) nth and G~' = eta / eta~'.  Raises
    DecompositionError when eta~' <= 0 (no such split exists).
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must lie in (0, 1]")
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    eta_t = eta - (1.0 - eta) * nth
    if eta_t <= 0.0:
        raise DecompositionError(
            f"pre-amplifier split needs eta > (1-eta) nth; got eta~' = {eta_t:.6g}")
    return eta_t, eta / eta_t


def decompose_general(eta: float, nth: float, G1: float) -> tuple[float, float, float]:
    """Three-factor split N[eta, nth] = A[G1] . N[eta_bar, 0] . A[G2].

    Valid for 1 <= G1 <= 1 + (1 - eta) nth; the endpoints reproduce the
    pre- and post-amplifier splits.  Returns (G1, eta_bar, G2).
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must lie in (0, 1]")
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    gmax = 1.0 + (1.0 - eta) * nth
    if not 1.0 <= G1 <= gmax + 1e-12:
        raise DecompositionError(f"G1 must lie in [1, {gmax:.6g}]; got {G1:.6g}")
    eta_bar = 1.0 - (1.0 - eta) / G1 * (nth + 1.0)
    denom = G1 - (1.0 - eta) * (nth + 1.0)
    if denom <= 0.0 or eta_bar <= 0.0:
        raise DecompositionError(
            f"split degenerates at G1 = {G1:.6g} (eta_bar = {eta_bar:.6g})")
    # G2 >= 1 holds throughout the valid G1 range; guard the rounding dip
    # to 1 - ulp at the G1 = 1 + (1 - eta) nth endpoint.
    return G1, eta_bar, max(eta / denom, 1.0)
