"""Truncated Fock-space oracle layer.

Operators are plain complex numpy arrays on the number basis
{|0>, ..., |n-1>} of one mode (row = bra index, column = ket index);
density matrices get the thin :class:`FockDensity` wrapper which checks
Hermiticity and normalization.  Quadratures follow the same convention
as :mod:`gkpcap.gaussian`: q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
vacuum variance 1/2.

Truncation is guarded, not silent: constructors that would put
non-negligible weight at the cutoff raise :class:`TruncationError`.
The channel routes implemented here (Kraus sums, two-mode dilations,
displacement-noise quadrature) are deliberately independent of the
moment-level maps in :mod:`gkpcap.gaussian` so that the two can be
cross-checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln, roots_legendre

from .gaussian import GaussianState

_HERM_TOL = 1e-10
_TRACE_TOL = 1e-8
_EIG_TOL = 1e-10
_ENTROPY_EIG_FLOOR = 1e-14


class TruncationError(ValueError):
    """Requested object does not fit in the truncated space."""


def required_dim(alpha_abs: float) -> int:
    """Smallest safe cutoff for a coherent component of modulus |alpha|.

    The Poisson tail of |alpha> beyond n ~ |alpha|^2 + 10 sqrt(|alpha|^2+1) + 20
    is below 1e-12, with margin.
    """
    a2 = float(alpha_abs) ** 2
    return int(math.ceil(a2 + 10.0 * math.sqrt(a2 + 1.0) + 20.0))


@dataclass
class FockDensity:
    """Density matrix on the truncated number basis.

    ``renorm`` records |1 - trace| absorbed at construction (e.g. after a
    truncation); the stored matrix always has unit trace.
    """

    data: np.ndarray
    renorm: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError("density matrix must be square")
        herm = np.abs(self.data - self.data.conj().T).max()
        if herm > _HERM_TOL:
            raise ValueError(f"density matrix not Hermitian: defect {herm:.3e}")
        tr = self.data.trace().real
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValueError(f"density matrix trace {tr:.12g} != 1")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_unnormalized(cls, data: np.ndarray) -> "FockDensity":
        """Normalize a raw matrix, recording the absorbed trace defect."""
        data = np.asarray(data, dtype=complex)
        data = 0.5 * (data + data.conj().T)
        tr = data.trace().real
        if tr <= 0:
            raise ValueError("cannot normalize: nonpositive trace")
        return cls(data / tr, renorm=abs(1.0 - tr))

    def validate(self, eig_tol: float = _EIG_TOL) -> None:
        """Full positivity check (O(n^3); the cheap checks run at init)."""
        wmin = np.linalg.eigvalsh(self.data).min()
        if wmin < -eig_tol:
            raise ValueError(f"density matrix not PSD: min eigenvalue {wmin:.3e}")

    def truncate(self, dim: int | None = None, tail_tol: float = 1e-12) -> "FockDensity":
        """Project onto the lowest ``dim`` levels and renormalize.

        With ``dim=None`` picks the smallest cutoff whose discarded
        diagonal weight stays below ``tail_tol``.
        """
        pops = np.real(np.diag(self.data))
        if dim is None:
            tail = np.concatenate([np.cumsum(pops[::-1])[::-1][1:], [0.0]])
            keep = np.nonzero(tail < tail_tol)[0]
            dim = int(keep[0]) + 1 if keep.size else self.dim
        if not 1 <= dim <= self.dim:
            raise ValueError("truncation dimension out of range")
        out = FockDensity.from_unnormalized(self.data[:dim, :dim])
        return FockDensity(out.data, renorm=max(out.renorm, self.renorm))


# ---------------------------------------------------------------------------
# operators

def destroy(n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=complex)
    ks = np.arange(1, n)
    a[ks - 1, ks] = np.sqrt(ks)
    return a


def number_op(n: int) -> np.ndarray:
    return np.diag(np.arange(n, dtype=float)).astype(complex)


def quadrature_ops(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(q, p) with q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2)."""
    a = destroy(n)
    ad = a.conj().T
    return (a + ad) / math.sqrt(2.0), 1j * (ad - a) / math.sqrt(2.0)


def rotation_op(theta: float, n: int) -> np.ndarray:
    """exp(-i theta N), matching the moment-level rotation R(theta)."""
    return np.diag(np.exp(-1j * theta * np.arange(n)))


def displacement_op(alpha: complex, n: int) -> np.ndarray:
    """Displacement D(alpha) from the associated-Laguerre closed form.

    <m|D|k> = sqrt(k!/m!) alpha^(m-k) e^(-|a|^2/2) L_k^(m-k)(|a|^2) for
    m >= k, and the conjugate-mirrored expression below the diagonal.
    """
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(n, dtype=complex)
    x = abs(alpha) ** 2
    m, k = np.indices((n, n))
    lo, hi = np.minimum(m, k), np.maximum(m, k)
    diff = hi - lo
    ratio = np.exp(0.5 * (gammaln(lo + 1.0) - gammaln(hi + 1.0)) - 0.5 * x)
    lag = eval_genlaguerre(lo, diff, x)
    # alpha^(m-k) above the diagonal in m, (-conj(alpha))^(k-m) below
    base = np.where(m >= k, alpha, -np.conj(alpha))
    pref = base ** diff
    return ratio * lag * pref


def fock_state(k: int, n: int) -> np.ndarray:
    if not 0 <= k < n:
        raise ValueError("level out of range")
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def coherent_state(alpha: complex, n: int) -> np.ndarray:
    """Coherent-state vector; raises if the cutoff cannot hold the tail."""
    need = required_dim(abs(alpha))
    if n < need:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):.4g} needs dim >= {need}, got {n}")
    ks = np.arange(n)
    if alpha == 0:
        return fock_state(0, n)
    logmod = -abs(alpha) ** 2 / 2.0 + ks * math.log(abs(alpha)) - 0.5 * gammaln(ks + 1.0)
    return np.exp(logmod + 1j * ks * np.angle(alpha))


def thermal_density(nth: float, n: int, tail_tol: float = 1e-12) -> FockDensity:
    """Thermal state diag((nth^k)/(nth+1)^(k+1)), tail-guarded and renormalized."""
    if nth < 0:
        raise ValueError("mean thermal photon number must be >= 0")
    if nth == 0:
        return FockDensity(np.outer(fock_state(0, n), fock_state(0, n).conj()))
    ratio = nth / (nth + 1.0)
    tail = ratio ** n
    if tail > tail_tol:
        raise TruncationError(
            f"thermal tail {tail:.3e} above {tail_tol:g} at dim {n}; enlarge the cutoff")
    ks = np.arange(n)
    w = np.exp(ks * math.log(ratio) - math.log(nth + 1.0))
    return FockDensity.from_unnormalized(np.diag(w).astype(complex))


def expectation(op: np.ndarray, rho: FockDensity | np.ndarray) -> complex:
    mat = rho.data if isinstance(rho, FockDensity) else rho
    return complex(np.trace(op @ mat))


def moments(rho: FockDensity | np.ndarray) -> GaussianState:
    """First and second quadrature moments, symmetrized."""
    mat = rho.data if isinstance(rho, FockDensity) else rho
    q, p = quadrature_ops(mat.shape[0])
    xbar = np.array([np.trace(q @ mat).real, np.trace(p @ mat).real])
    ops = (q, p)
    V = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            anti = ops[i] @ ops[j] + ops[j] @ ops[i]
            V[i, j] = 0.5 * np.trace(anti @ mat).real - xbar[i] * xbar[j]
    return GaussianState(xbar, V)


def entropy_bits(rho: FockDensity | np.ndarray) -> float:
    """von Neumann entropy in bits; eigenvalues below 1e-14 are dropped."""
    mat = rho.data if isinstance(rho, FockDensity) else rho
    w = np.linalg.eigvalsh(mat)
    w = w[w > _ENTROPY_EIG_FLOOR]
    return float(-(w * np.log2(w)).sum())


def mean_photon(rho: FockDensity | np.ndarray) -> float:
    mat = rho.data if isinstance(rho, FockDensity) else rho
    return expectation(number_op(mat.shape[0]), rho).real


def dephase(rho: FockDensity | np.ndarray) -> FockDensity:
    """Drop every number-basis off-diagonal (idempotent, trace-preserving)."""
    mat = rho.data if isinstance(rho, FockDensity) else rho
    return FockDensity(np.diag(np.diag(mat)))


# ---------------------------------------------------------------------------
# channels

def pure_loss_kraus(eta: float, n: int, l_max: int | None = None) -> list[np.ndarray]:
    """Kraus family E_l = sqrt((1-eta)^l / l!) eta^(N/2) a^l, l = 0..l_max.

    Completeness sum_l E_l^dag E_l = I holds exactly on the truncated
    space once l_max >= n - 1.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    if l_max is None:
        l_max = n - 1
    if l_max > n:
        raise ValueError("l_max must be <= n")
    damp = np.diag(np.power(eta, np.arange(n) / 2.0)).astype(complex)
    a = destroy(n)
    ks, al = [], np.eye(n, dtype=complex)
    for l in range(l_max + 1):
        coeff = math.sqrt((1.0 - eta) ** l / math.factorial(l))
        if coeff > 0.0:
            ks.append(coeff * (damp @ al))
        al = a @ al
    return ks


def apply_kraus(kraus: list[np.ndarray], rho: FockDensity | np.ndarray) -> FockDensity:
    mat = rho.data if isinstance(rho, FockDensity) else np.asarray(rho, dtype=complex)
    out = np.zeros_like(mat)
    for K in kraus:
        out += K @ mat @ K.conj().T
    return FockDensity.from_unnormalized(out)


def _graded_two_mode_exp(coupling, pairs_of, theta: float, n1: int, n2: int) -> np.ndarray:
    """exp(-i theta H) for a two-mode Hermitian H with a conserved grading.

    ``pairs_of`` enumerates the (j, k) basis pairs of each grade;
    ``coupling(j, k)`` is the element <j+1 side| coupling the ladder, see
    callers.  The grading makes each block exactly closed, so this equals
    the eigendecomposition exponential of the full generator.
    """
    U = np.zeros((n1 * n2, n1 * n2), dtype=complex)
    for pairs in pairs_of(n1, n2):
        flat = np.array([j * n2 + k for j, k in pairs])
        m = len(pairs)
        H = np.zeros((m, m), dtype=complex)
        for t in range(m - 1):
            c = coupling(*pairs[t])
            H[t + 1, t] = 1j * c
            H[t, t + 1] = -1j * c
        w, V = np.linalg.eigh(H)
        U[np.ix_(flat, flat)] = (V * np.exp(-1j * theta * w)) @ V.conj().T
    return U


def beam_splitter_op(eta: float, n_sys: int, n_env: int) -> np.ndarray:
    """Two-mode beam-splitter unitary exp(theta (a1^dag a2 - a1 a2^dag)).

    theta = arccos(sqrt(eta)); in the Heisenberg picture
    a1 -> sqrt(eta) a1 + sqrt(1-eta) a2.  Blocks of fixed total photon
    number j + k are closed, so the truncated exponential is exact on
    states supported away from the cutoff.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    theta = math.acos(min(math.sqrt(eta), 1.0))

    def pairs_of(ns, ne):
        for total in range(ns + ne - 1):
            lo = max(0, total - (ne - 1))
            hi = min(ns - 1, total)
            # ladder ordered by increasing j; coupling (j,k) -> (j+1,k-1)
            yield [(j, total - j) for j in range(lo, hi + 1)]

    # <j+1, k-1| (a1^dag a2 - a1 a2^dag) |j, k> = sqrt((j+1) k)
    return _graded_two_mode_exp(lambda j, k: math.sqrt((j + 1) * k),
                                pairs_of, theta, n_sys, n_env)


def two_mode_squeezer_op(G: float, n_sys: int, n_env: int) -> np.ndarray:
    """Two-mode squeezer exp(r (a1^dag a2^dag - a1 a2)) with cosh^2 r = G.

    Heisenberg action a1 -> sqrt(G) a1 + sqrt(G-1) a2^dag.  Blocks of
    fixed photon-number difference j - k are closed; unlike the beam
    splitter, each ladder is cut by the truncation, so keep the support
    well below both cutoffs.
    """
    if G < 1.0:
        raise ValueError("gain must be >= 1")
    r = math.acosh(math.sqrt(G))

    def pairs_of(ns, ne):
        for diff in range(-(ne - 1), ns):
            j0 = max(diff, 0)
            k0 = j0 - diff
            m = min(ns - j0, ne - k0)
            yield [(j0 + t, k0 + t) for t in range(m)]

    # <j+1, k+1| (a1^dag a2^dag - a1 a2) |j, k> = sqrt((j+1)(k+1))
    return _graded_two_mode_exp(lambda j, k: math.sqrt((j + 1) * (k + 1)),
                                pairs_of, r, n_sys, n_env)


def partial_trace_second(joint: np.ndarray, n1: int, n2: int) -> np.ndarray:
    return np.einsum('jkJk->jJ', joint.reshape(n1, n2, n1, n2))


def partial_trace_first(joint: np.ndarray, n1: int, n2: int) -> np.ndarray:
    return np.einsum('jkjK->kK', joint.reshape(n1, n2, n1, n2))


def thermal_loss_apply(eta: float, nth: float, rho: FockDensity | np.ndarray,
                       n_env: int) -> FockDensity:
    """Thermal attenuator via the beam-splitter dilation.

    Couples the system to an ``n_env``-dimensional thermal environment and
    traces the environment out.  Tail-guards the environment cutoff.
    """
    mat = rho.data if isinstance(rho, FockDensity) else np.asarray(rho, dtype=complex)
    if eta == 1.0:                       # lossless: environment never couples
        return FockDensity(mat)
    n_sys = mat.shape[0]
    env = thermal_density(nth, n_env, tail_tol=1e-10).data
    U = beam_splitter_op(eta, n_sys, n_env)
    joint = U @ np.kron(mat, env) @ U.conj().T
    return FockDensity.from_unnormalized(partial_trace_second(joint, n_sys, n_env))


def amplifier_apply(G: float, rho: FockDensity | np.ndarray, n_env: int) -> FockDensity:
    """Quantum-limited amplifier via the two-mode-squeezer dilation (vacuum idler)."""
    mat = rho.data if isinstance(rho, FockDensity) else np.asarray(rho, dtype=complex)
    n_sys = mat.shape[0]
    env = np.outer(fock_state(0, n_env), fock_state(0, n_env).conj())
    U = two_mode_squeezer_op(G, n_sys, n_env)
    joint = U @ np.kron(mat, env) @ U.conj().T
    return FockDensity.from_unnormalized(partial_trace_second(joint, n_sys, n_env))


def random_displacement_apply(sigma2: float, rho: FockDensity | np.ndarray,
                              n_radial: int = 32, n_angular: int = 32) -> FockDensity:
    """Gaussian random-displacement channel by polar quadrature.

    Integrates (1/(pi s^2)) exp(-|alpha|^2/s^2) D(alpha) rho D(alpha)^dag
    with Gauss-Legendre nodes on r in [0, 6 sigma] times a uniform angular
    grid; weights are renormalized so the map is exactly trace preserving.
    """
    if sigma2 < 0:
        raise ValueError("displacement variance must be >= 0")
    mat = rho.data if isinstance(rho, FockDensity) else np.asarray(rho, dtype=complex)
    if sigma2 == 0.0:
        return FockDensity(mat)
    n = mat.shape[0]
    sigma = math.sqrt(sigma2)
    if n < required_dim(6.0 * sigma):
        raise TruncationError(
            f"dim {n} cannot hold displacements up to 6 sigma = {6*sigma:.4g}"
            f" (need {required_dim(6.0 * sigma)})")
    xs, ws = roots_legendre(n_radial)
    rs = 3.0 * sigma * (xs + 1.0)           # map [-1, 1] -> [0, 6 sigma]
    # radial weight of (1/(pi s^2)) e^{-r^2/s^2} r dr, Jacobian 3 sigma
    wr = ws * 3.0 * sigma * rs * np.exp(-rs ** 2 / sigma2) / (math.pi * sigma2)
    phases = np.exp(2j * math.pi * np.arange(n_angular) / n_angular)
    levels = np.arange(n)
    out = np.zeros_like(mat)
    for r, w in zip(rs, wr):
        base = displacement_op(complex(r), n)
        acc = np.zeros_like(mat)
        for ph in phases:
            # D(r e^{i phi}) = e^{i phi N} D(r) e^{-i phi N}: diagonal scaling
            u = ph ** levels
            D = (u[:, None] * base) * u.conj()[None, :]
            acc += D @ mat @ D.conj().T
        out += w * acc
    # weights sum to 1 - e^{-36} up to quadrature error; renormalize so the
    # map is exactly trace preserving
    out /= wr.sum() * n_angular
    return FockDensity.from_unnormalized(out)


# ---------------------------------------------------------------------------
# Wigner functions

def wigner_gaussian(state: GaussianState, qs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """Closed-form Gaussian Wigner function on a (q, p) grid.

    W(x) = exp(-(1/2)(x - xbar)^t V^-1 (x - xbar)) / (2 pi sqrt(det V)),
    normalized so the vacuum peaks at 1/pi.  Returns W[i, j] = W(qs[i], ps[j]).
    """
    Vinv = np.linalg.inv(state.V)
    det = np.linalg.det(state.V)
    dq = np.asarray(qs, dtype=float)[:, None] - state.xbar[0]
    dp = np.asarray(ps, dtype=float)[None, :] - state.xbar[1]
    quad = Vinv[0, 0] * dq ** 2 + (Vinv[0, 1] + Vinv[1, 0]) * dq * dp + Vinv[1, 1] * dp ** 2
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def wigner(rho: FockDensity | np.ndarray, qs: np.ndarray, ps: np.ndarray,
           band_tol: float = 1e-18) -> np.ndarray:
    """Wigner function of a Fock-basis density matrix on a (q, p) grid.

    Uses the displaced-parity form W(q, p) = (1/pi) Tr[rho D(2 alpha) Pi]
    with alpha = (q + ip)/sqrt(2) and parity Pi = (-1)^N, evaluated by the
    associated-Laguerre recurrence along the diagonals of rho (bands whose
    sup-norm falls below ``band_tol`` are skipped).  Returns
    W[i, j] = W(qs[i], ps[j]); real by construction.
    """
    mat = rho.data if isinstance(rho, FockDensity) else np.asarray(rho, dtype=complex)
    n = mat.shape[0]
    qs = np.asarray(qs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    B = math.sqrt(2.0) * (qs[:, None] + 1j * ps[None, :])
    x = np.abs(B) ** 2

    signs = (-1.0) ** np.arange(n)
    scale = np.max(np.abs(mat)) or 1.0
    acc = np.zeros_like(x, dtype=complex)
    Bpow = np.ones_like(B)
    for k in range(n):
        band = np.diagonal(mat, offset=k)       # rho_{m, m+k}, m = 0..n-1-k
        if k > 0:
            Bpow = Bpow * B
        if np.abs(band).max() <= band_tol * scale:
            continue
        m_max = int(np.nonzero(np.abs(band) > band_tol * scale)[0][-1])
        ms = np.arange(m_max + 1)
        coeff = band[:m_max + 1] * signs[:m_max + 1] * np.exp(
            0.5 * (gammaln(ms + 1.0) - gammaln(ms + k + 1.0)))
        # Laguerre recurrence in the degree m at fixed order k
        Lm1 = np.ones_like(x)
        S = coeff[0] * Lm1
        if m_max >= 1:
            Lm = 1.0 + k - x
            S = S + coeff[1] * Lm
            for m in range(1, m_max):
                Lm, Lm1 = ((2 * m + k + 1 - x) * Lm - (m + k) * Lm1) / (m + 1), Lm
                S = S + coeff[m + 1] * Lm
        acc += (S if k == 0 else 2.0 * (S * Bpow).real)
    return (np.exp(-x / 2.0) / math.pi) * acc.real
