"""Choi-matrix and superoperator algebra for finite-dimensional channels.

Element convention: the Choi matrix of a channel A from a dim_in space to
a dim_out space is

    X[[i j], [i' j']] = <j| A(|i><i'|) |j'>,

with the composite index [i j] = i * dim_out + j (input index major).
The superoperator of the same channel is the pure reindexing
T[(j j'), (i i')] = X[[i j], [i' j']], acting on row-major vectorized
density matrices; composite channels multiply as T_second @ T_first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-9
PSD_TOL = 1e-8
TP_TOL = 1e-7


@dataclass
class ChoiMatrix:
    """Choi matrix of a completely positive trace-preserving map."""

    X: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=complex)
        m = self.dim_in * self.dim_out
        if self.X.shape != (m, m):
            raise ValueError(f"Choi matrix must be {m}x{m} for dims "
                             f"{self.dim_in}->{self.dim_out}")

    def as_tensor(self) -> np.ndarray:
        """4-index view X4[i, j, i', j'] (input major on both sides)."""
        n, d = self.dim_in, self.dim_out
        return self.X.reshape(n, d, n, d)

    def validate(self) -> "ChoiMatrix":
        herm = np.abs(self.X - self.X.conj().T).max()
        if herm > HERM_TOL:
            raise ValueError(f"Choi matrix not Hermitian: defect {herm:.2e}")
        min_eig = float(np.linalg.eigvalsh(self.X).min())
        if min_eig < -PSD_TOL:
            raise ValueError(f"Choi matrix not PSD: min eigenvalue {min_eig:.2e}")
        tp = np.abs(partial_trace_output(self.X, self.dim_in, self.dim_out)
                    - np.eye(self.dim_in)).max()
        if tp > TP_TOL:
            raise ValueError(f"trace preservation violated: defect {tp:.2e}")
        return self

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Act on a density matrix: sigma_jj' = sum_ii' rho_ii' X4[i,j,i',j']."""
        return np.einsum("iI,ijIJ->jJ", np.asarray(rho, dtype=complex),
                         self.as_tensor())


@dataclass
class Superoperator:
    """Matrix acting on row-major vectorized density operators."""

    T: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=complex)
        if self.T.shape != (self.dim_out ** 2, self.dim_in ** 2):
            raise ValueError("superoperator shape does not match dims")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = self.T @ np.asarray(rho, dtype=complex).reshape(-1)
        return out.reshape(self.dim_out, self.dim_out)


def choi_to_superop(choi: ChoiMatrix) -> Superoperator:
    n, d = choi.dim_in, choi.dim_out
    T = choi.as_tensor().transpose(1, 3, 0, 2).reshape(d * d, n * n)
    return Superoperator(T, n, d)


def superop_to_choi(sup: Superoperator) -> ChoiMatrix:
    n, d = sup.dim_in, sup.dim_out
    X = sup.T.reshape(d, d, n, n).transpose(2, 0, 3, 1).reshape(n * d, n * d)
    return ChoiMatrix(X, n, d)


def identity_choi(dim: int) -> ChoiMatrix:
    X = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for k in range(dim):
            X[i * dim + i, k * dim + k] = 1.0
    return ChoiMatrix(X, dim, dim)


def choi_from_kraus(kraus, dim_in: int | None = None,
                    dim_out: int | None = None) -> ChoiMatrix:
    """Choi matrix of sum_k K rho K^dagger, checking Kraus completeness."""
    ks = [np.asarray(K, dtype=complex) for K in kraus]
    dout, din = ks[0].shape
    dim_in = din if dim_in is None else dim_in
    dim_out = dout if dim_out is None else dim_out
    if (dout, din) != (dim_out, dim_in):
        raise ValueError("Kraus operator shape does not match dims")
    comp = sum(K.conj().T @ K for K in ks)
    defect = np.abs(comp - np.eye(din)).max()
    if defect > 1e-10:
        raise ValueError(f"Kraus family not complete: defect {defect:.2e}")
    # X4[i,j,i',j'] = sum_k K[j,i] conj(K[j',i'])
    X4 = sum(np.einsum("ji,JI->ijIJ", K, K.conj()) for K in ks)
    return ChoiMatrix(X4.reshape(din * dout, din * dout), din, dout)


def compose_choi(second: ChoiMatrix, first: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of (second after first), via superoperator product."""
    if first.dim_out != second.dim_in:
        raise ValueError("channel dimensions do not chain")
    T = choi_to_superop(second).T @ choi_to_superop(first).T
    return superop_to_choi(Superoperator(T, first.dim_in, second.dim_out))


def partial_trace_output(X: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    return np.einsum("ijIj->iI", X.reshape(dim_in, dim_out, dim_in, dim_out))


def partial_trace_input(X: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    return np.einsum("ijiJ->jJ", X.reshape(dim_in, dim_out, dim_in, dim_out))


def f_n_map(XN: ChoiMatrix, XE: np.ndarray | ChoiMatrix) -> np.ndarray:
    """Channel-sandwich map taking an encoder Choi to the decoder's cost matrix.

    For the noise Choi X_N (n -> n) and any Hermitian X on the encoder
    index space (d -> n), returns the Hermitian matrix with elements

        f[[l' i'], [l i]] = sum_{k k'} X_N[[k l], [k' l']] X[[i k], [i' k']]

    on the decoder composite index [l i] = l * d + i, so that
    Tr[X_D f_n_map(X_N, X_E)] is d^2 times the entanglement fidelity of
    decode-noise-encode.  Implemented as a superoperator contraction;
    linear in X.
    """
    XE_mat = XE.X if isinstance(XE, ChoiMatrix) else np.asarray(XE, dtype=complex)
    n = XN.dim_in
    d = XE_mat.shape[0] // n if XE_mat.shape[0] % n == 0 else None
    if d is None or XE_mat.shape != (n * d, n * d):
        raise ValueError("encoder matrix does not match the noise dimension")
    TN = choi_to_superop(XN).T
    TE = XE_mat.reshape(d, n, d, n).transpose(1, 3, 0, 2).reshape(n * n, d * d)
    X_ne4 = (TN @ TE).reshape(n, n, d, d).transpose(2, 0, 3, 1)
    return X_ne4.transpose(3, 2, 1, 0).reshape(n * d, n * d)


def entanglement_fidelity(XE: ChoiMatrix, XN: ChoiMatrix, XD: ChoiMatrix,
                          d: int) -> float:
    """Entanglement fidelity of decode-noise-encode on the maximally
    entangled input, (1/d^2) Tr[X_D f(X_E)]."""
    val = np.trace(XD.X @ f_n_map(XN, XE)) / d ** 2
    if abs(val.imag) > 1e-9:
        raise ValueError(f"fidelity has imaginary residue {val.imag:.2e}")
    return float(val.real)


def encoder_objective(XN: ChoiMatrix, XD: ChoiMatrix) -> np.ndarray:
    """Hermitian M_E on the encoder index space with
    Tr[X_E M_E] = Tr[X_D f_n_map(X_N, X_E)] for every X_E (the adjoint
    of the fidelity's encoder slot)."""
    n, d = XD.dim_in, XD.dim_out
    XN4 = XN.as_tensor()
    XD4 = XD.as_tensor()
    ME4 = np.einsum("klKL,liLI->IKik", XN4, XD4)
    return ME4.reshape(d * n, d * n)


def average_output_state(choi: ChoiMatrix) -> np.ndarray:
    """Channel output on the maximally mixed input, Tr_in[X]/dim_in."""
    return partial_trace_input(choi.X, choi.dim_in, choi.dim_out) / choi.dim_in
