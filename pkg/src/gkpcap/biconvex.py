"""Alternating-SDP search for encoder/decoder pairs under an energy cap.

The entanglement fidelity of decode-noise-encode is bilinear in the
encoder and decoder Choi matrices, so fixing either one makes the other
a semidefinite program: maximize a linear functional over the CPTP set
(plus a mean-energy bound on the encoder output).  Alternating the two
solves climbs the fidelity monotonically to a (local) optimum.

Each phase keeps one parameter-cached problem solved by an interior
point method (Clarabel), with a first-order rescue pass (SCS) if it
fails to reach the requested tolerances; every returned iterate is
cleaned — symmetrized, PSD-clipped, then congruence-rescaled so its
output partial trace is exactly the identity — so it satisfies the
Choi invariants to rounding error rather than to solver tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .choi import (ChoiMatrix, average_output_state, choi_from_kraus,
                   encoder_objective, entanglement_fidelity, f_n_map,
                   partial_trace_output)
from .fock import pure_loss_kraus


@dataclass
class SdpSettings:
    """Per-solve tolerances: primal feasibility and relative objective gap."""

    feas_tol: float = 1e-8
    gap_tol: float = 1e-7
    max_solver_iters: int = 500


@dataclass
class OptimizationConfig:
    eta: float
    fock_dim: int = 20
    code_dim: int = 2
    energy_bound: float = 3.0
    max_iters: int = 800
    fidelity_tol: float = 1e-9
    seed: int = 0
    sdp: SdpSettings = field(default_factory=SdpSettings)

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("transmissivity must lie in (0, 1]")
        if not self.fock_dim > self.code_dim >= 2:
            raise ValueError("need fock_dim > code_dim >= 2")
        if self.energy_bound <= 0:
            raise ValueError("energy bound must be > 0")


@dataclass
class IterationRecord:
    iteration: int
    phase: str
    fidelity: float


@dataclass
class OptimizationTrace:
    config: OptimizationConfig
    records: list[IterationRecord]
    X_E: ChoiMatrix
    X_D: ChoiMatrix
    infidelity: float
    converged: bool
    top_level_population: float
    checkpoints: dict[int, ChoiMatrix] = field(default_factory=dict)

    def validate(self) -> "OptimizationTrace":
        """Check monotone ascent.

        The very first encoder step is exempt: a random isometry start
        usually violates the energy cap, so projecting into the feasible
        set can lower the fidelity once; every later step maximizes over
        a set containing the previous iterate.
        """
        fids = [r.fidelity for r in self.records[1:]]
        drops = [fids[k + 1] - fids[k] for k in range(len(fids) - 1)]
        worst = min(drops, default=0.0)
        if worst < -self.config.sdp.gap_tol:
            raise ValueError(f"fidelity decreased by {-worst:.2e} between steps")
        return self


class SolverFailure(RuntimeError):
    """SDP solve failed; ``trace`` holds the last good iterates."""

    def __init__(self, message: str, trace: OptimizationTrace | None = None):
        super().__init__(message)
        self.trace = trace


def pure_loss_choi(eta: float, n: int) -> ChoiMatrix:
    """Choi matrix of the truncated pure-loss channel on n Fock levels."""
    return choi_from_kraus(pure_loss_kraus(eta, n))


def _isometry_choi(V: np.ndarray) -> ChoiMatrix:
    """Choi matrix (rank one) of rho -> V rho V^dagger for isometry V (n x d)."""
    n, d = V.shape
    w = V.T.reshape(-1)  # w[i*n + k] = V[k, i]
    return ChoiMatrix(np.outer(w, w.conj()), d, n)


def random_isometry_encoding(n: int, d: int, seed: int) -> ChoiMatrix:
    """Encoder Choi of the first d columns of a Haar-random n x n unitary.

    The unitary comes from the QR decomposition of a complex standard
    normal matrix with the triangular factor's diagonal phases absorbed,
    which makes the distribution exactly Haar.
    """
    if n < d:
        raise ValueError("need n >= d")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return _isometry_choi((q * phases)[:, :d])


def gkp_encoding_choi(fe, fock_dim: int | None = None) -> ChoiMatrix:
    """Encoder Choi of the isometry |mu> -> orthonormalized grid codeword.

    When ``fock_dim`` differs from the construction cutoff the codewords
    are truncated (or zero-padded) and re-orthonormalized; truncation
    that destroys linear independence raises the rank-deficiency error.
    """
    from .gkp import loewdin_orthonormalize

    rows = fe.orthonormal_codewords()
    if fock_dim is not None and fock_dim != fe.fock_dim:
        if fock_dim < fe.fock_dim:
            rows = loewdin_orthonormalize(rows[:, :fock_dim])
        else:
            rows = np.hstack([rows, np.zeros((rows.shape[0],
                                              fock_dim - fe.fock_dim))])
    return _isometry_choi(rows.T)


def clean_choi(X: np.ndarray, dim_in: int, dim_out: int) -> ChoiMatrix:
    """Restore the Choi invariants of a near-feasible solver iterate.

    Symmetrize and clip negative eigenvalues (exact positivity), then
    conjugate by A (x) I with A = (Tr_out X)^(-1/2) on the input factor:
    congruence preserves positivity and renormalizes the output partial
    trace to the identity exactly, so both invariants hold to rounding
    error in a single pass.  Moves the iterate by O(solver residual).
    """
    X = np.asarray(X, dtype=complex)
    X = (X + X.conj().T) / 2.0
    w, V = np.linalg.eigh(X)
    if w.min() < 0:
        X = (V * np.clip(w, 0.0, None)) @ V.conj().T
    red = partial_trace_output(X, dim_in, dim_out)
    wr, Vr = np.linalg.eigh((red + red.conj().T) / 2.0)
    if wr.min() < 0.5:
        raise SolverFailure(
            f"iterate too far from trace preservation to repair "
            f"(reduced-state eigenvalue {wr.min():.3g})")
    A = (Vr / np.sqrt(wr)) @ Vr.conj().T
    AI = np.kron(A, np.eye(dim_out))
    return ChoiMatrix(AI @ X @ AI.conj().T, dim_in, dim_out)


class _CachedSdp:
    """One phase's SDP with the objective matrix as a warm-started parameter."""

    def __init__(self, dim_in: int, dim_out: int,
                 energy_op: np.ndarray | None = None,
                 energy_bound: float | None = None):
        m = dim_in * dim_out
        self.dims = (dim_in, dim_out)
        self.X = cp.Variable((m, m), hermitian=True)
        self.M = cp.Parameter((m, m), hermitian=True)
        constraints = [
            self.X >> 0,
            cp.partial_trace(self.X, [dim_in, dim_out], 1) == np.eye(dim_in),
        ]
        if energy_op is not None:
            full = np.kron(np.eye(dim_in), np.asarray(energy_op, dtype=complex))
            constraints.append(
                cp.real(cp.trace(full @ self.X)) <= energy_bound * dim_in)
        self.problem = cp.Problem(
            cp.Maximize(cp.real(cp.trace(self.M @ self.X))), constraints)

    def solve(self, M: np.ndarray, settings: SdpSettings) -> ChoiMatrix:
        self.M.value = (M + M.conj().T) / 2.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                self.problem.solve(
                    solver=cp.CLARABEL, verbose=False,
                    tol_feas=settings.feas_tol,
                    tol_gap_rel=settings.gap_tol,
                    tol_gap_abs=min(settings.feas_tol, 1e-8),
                    max_iter=settings.max_solver_iters)
            except cp.error.SolverError:
                pass
            if self.problem.status != cp.OPTIMAL:
                # first-order polish, warm-started from the interior-point iterate
                self.problem.solve(
                    solver=cp.SCS, warm_start=True, verbose=False,
                    eps_abs=settings.feas_tol, eps_rel=settings.gap_tol,
                    max_iters=200_000)
        if self.problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            raise SolverFailure(
                f"SDP returned status {self.problem.status!r}")
        return clean_choi(self.X.value, *self.dims)


def decoder_sdp_step(M: np.ndarray, dim_in: int, dim_out: int,
                     settings: SdpSettings | None = None,
                     _cache: _CachedSdp | None = None) -> ChoiMatrix:
    """Maximize Tr[X_D M] over CPTP decoders (dim_in -> dim_out)."""
    settings = settings or SdpSettings()
    prob = _cache or _CachedSdp(dim_in, dim_out)
    return prob.solve(M, settings)


def encoder_sdp_step(ME: np.ndarray, energy_op: np.ndarray, energy_bound: float,
                     dim_in: int, dim_out: int,
                     settings: SdpSettings | None = None,
                     _cache: _CachedSdp | None = None) -> ChoiMatrix:
    """Maximize Tr[X_E ME] over CPTP encoders (dim_in -> dim_out) whose
    average output energy Tr[(I (x) energy_op) X_E]/dim_in stays within
    ``energy_bound``.  Always feasible: the vacuum encoding has zero energy."""
    settings = settings or SdpSettings()
    prob = _cache or _CachedSdp(dim_in, dim_out, energy_op, energy_bound)
    return prob.solve(ME, settings)


def alternate_optimize(config: OptimizationConfig,
                       checkpoint_iters: tuple[int, ...] = (),
                       progress=None) -> OptimizationTrace:
    """Alternate decoder and encoder SDP steps from a random isometry start.

    Records the fidelity after every half-step; stops early once the
    per-iteration improvement stays below ``fidelity_tol`` for five
    consecutive iterations.  ``checkpoint_iters`` selects iterations
    whose post-encoder-step Choi matrices are kept in the trace.
    """
    n, d = config.fock_dim, config.code_dim
    XN = pure_loss_choi(config.eta, n)
    energy_op = np.diag(np.arange(n, dtype=float))
    XE = random_isometry_encoding(n, d, config.seed)
    dec_sdp = _CachedSdp(n, d)
    enc_sdp = _CachedSdp(d, n, energy_op, config.energy_bound)

    records: list[IterationRecord] = []
    checkpoints: dict[int, ChoiMatrix] = {}
    XD = None
    prev_f = -np.inf
    stall = 0
    converged = False

    def _finish(reason_converged: bool) -> OptimizationTrace:
        pops = np.diag(average_output_state(XE)).real
        trace = OptimizationTrace(
            config=config, records=records, X_E=XE, X_D=XD,
            infidelity=1.0 - records[-1].fidelity if records else np.nan,
            converged=reason_converged, top_level_population=float(pops[-2:].sum()),
            checkpoints=checkpoints)
        return trace

    for it in range(1, config.max_iters + 1):
        try:
            XD = dec_sdp.solve(f_n_map(XN, XE.X), config.sdp)
            f_dec = entanglement_fidelity(XE, XN, XD, d)
            records.append(IterationRecord(it, "decoder", f_dec))
            XE = enc_sdp.solve(encoder_objective(XN, XD), config.sdp)
            f_enc = entanglement_fidelity(XE, XN, XD, d)
            records.append(IterationRecord(it, "encoder", f_enc))
        except SolverFailure as exc:
            raise SolverFailure(str(exc), _finish(False)) from exc
        if it in checkpoint_iters:
            checkpoints[it] = XE
        if progress is not None:
            progress(it, f_enc)
        if f_enc - prev_f < config.fidelity_tol:
            stall += 1
            if stall >= 5:
                converged = True
                break
        else:
            stall = 0
        prev_f = f_enc
    return _finish(converged)
