"""Grid (GKP) codes: lattices, finite-energy codewords, decoding.

A qudit grid code is specified by a symplectic 2x2 matrix S with unit
determinant whose columns generate a unit-cell-area lattice.  Logical
displacements translate phase space by the vectors sqrt(2 pi / d) S z,
z in Z^2; the stabilizer group is generated by the d-th powers of the
two elementary logical displacements.  The two standard cells are the
square lattice (S = I) and the hexagonal lattice, which maximizes the
packing radius at fixed cell area.

Finite-energy codewords apply exp(-Delta^2 N) to the ideal grid state,
which acts on each coherent-state component as an amplitude shrink plus
a Gaussian envelope weight; components are enumerated until their weight
falls below 1e-10 of the largest one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.special import gammaln

from .fock import FockDensity, TruncationError, displacement_op, required_dim

_WEIGHT_CUT = 1e-10


@dataclass
class GkpLattice:
    """Unit-cell generator matrix S (columns) plus the code dimension d."""

    S: np.ndarray
    d: int = 2
    label: str = "custom"

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(self.S) - 1.0) > 1e-10:
            raise ValueError("lattice generator must have determinant 1")
        if self.d < 1:
            raise ValueError("code dimension must be a positive integer")


def square_lattice(d: int = 2) -> GkpLattice:
    return GkpLattice(np.eye(2), d, label="square")


def hexagonal_lattice(d: int = 2) -> GkpLattice:
    c = math.sqrt(2.0 / math.sqrt(3.0))
    return GkpLattice(c * np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]]),
                      d, label="hexagonal")


def min_distance(lattice: GkpLattice, window: int = 4) -> float:
    """Shortest nonzero vector of the unit-cell lattice S Z^2."""
    best = math.inf
    for n1 in range(-window, window + 1):
        for n2 in range(-window, window + 1):
            if n1 == 0 and n2 == 0:
                continue
            v = lattice.S @ np.array([n1, n2], dtype=float)
            best = min(best, float(np.hypot(v[0], v[1])))
    return best


def correctable_radius(lattice: GkpLattice, d: int | None = None) -> float:
    """Packing radius of the logical lattice sqrt(2 pi / d) S Z^2."""
    d = lattice.d if d is None else d
    if d < 1:
        raise ValueError("code dimension must be >= 1")
    return 0.5 * math.sqrt(2.0 * math.pi / d) * min_distance(lattice)


def _logical_generators(lattice: GkpLattice, d: int) -> tuple[complex, complex]:
    """Coherent amplitudes of the two elementary logical displacements.

    The amplitude alpha = (dq + i dp)/sqrt(2) encodes the phase-space
    translation (dq, dp); one logical-X step translates by
    sqrt(2 pi / d) times the first column of S, one logical-Z step by
    the second column.
    """
    S = lattice.S
    scale = math.sqrt(math.pi / d)
    gamma_x = scale * (S[0, 0] + 1j * S[1, 0])
    gamma_z = scale * (S[0, 1] + 1j * S[1, 1])
    return gamma_x, gamma_z


def stabilizer_displacements(lattice: GkpLattice, d: int | None = None
                             ) -> tuple[complex, complex]:
    """Coherent amplitudes of the two stabilizer generators (S_q, S_p).

    These are the d-th powers of the logical displacements, so their
    translation vectors are sqrt(2 pi d) times the columns of S; for the
    square cell S_q translates p (a function of the position quadrature)
    and S_p translates q.
    """
    d = lattice.d if d is None else d
    gx, gz = _logical_generators(lattice, d)
    return d * gz, d * gx


@dataclass
class FiniteEnergyGkp:
    """Finite-energy grid codewords on a truncated Fock space.

    ``codewords`` rows are the normalized (not mutually orthogonal)
    kets; ``gram`` records their overlap matrix, whose distance from the
    identity is the finite-energy overlap defect.
    """

    lattice: GkpLattice
    d: int
    delta: float
    fock_dim: int
    codewords: np.ndarray
    gram: np.ndarray
    _ortho: np.ndarray | None = field(default=None, repr=False, compare=False)

    def orthonormal_codewords(self) -> np.ndarray:
        """Löwdin-orthonormalized codewords (rows; closest orthonormal family)."""
        if self._ortho is None:
            self._ortho = loewdin_orthonormalize(self.codewords)
        return self._ortho

    def code_projector(self) -> np.ndarray:
        ortho = self.orthonormal_codewords()
        return ortho.conj().T @ ortho


def _coherent_batch(alphas: np.ndarray, n: int) -> np.ndarray:
    """Rows of coherent-state amplitudes for many alphas at once (unguarded)."""
    ks = np.arange(n)
    mod = np.abs(alphas)
    safe = np.where(mod > 0, mod, 1.0)
    logmod = (-mod[:, None] ** 2 / 2.0
              + ks[None, :] * np.log(safe[:, None]) - 0.5 * gammaln(ks + 1.0)[None, :])
    out = np.exp(logmod + 1j * ks[None, :] * np.angle(alphas)[:, None])
    zero = mod == 0
    if zero.any():
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out


def finite_energy_codewords(lattice: GkpLattice, d: int | None, delta: float,
                            fock_dim: int) -> FiniteEnergyGkp:
    """Construct exp(-Delta^2 N)-regularized grid codewords.

    Each ideal codeword is a phased superposition of coherent states on
    the shifted logical lattice — for the square cell at dimension d the
    component amplitudes are sqrt(pi/d) ((d n1 + mu) + i n2).  The energy
    envelope reweights the component at amplitude alpha by
    exp(-|alpha|^2 (1 - e^(-2 Delta^2))/2) and shrinks it to
    alpha e^(-Delta^2).  Components below 1e-10 relative weight are
    dropped.  The cutoff is validated a posteriori: the top Fock band of
    each codeword must hold less than 1e-9 of its norm.
    """
    d = lattice.d if d is None else d
    if d < 1:
        raise ValueError("code dimension must be >= 1")
    if delta <= 0:
        raise ValueError("envelope width must be > 0")
    gx, gz = _logical_generators(lattice, d)
    damp = 1.0 - math.exp(-2.0 * delta ** 2)
    shrink = math.exp(-delta ** 2)

    # envelope support: weight >= cut requires |alpha|^2 <= 2 ln(1/cut)/damp
    r_max = math.sqrt(2.0 * math.log(1.0 / _WEIGHT_CUT) / damp)
    # conservative index box for the skewed generator pair
    area = abs(gx.real * gz.imag - gx.imag * gz.real)
    box_m = int(math.ceil(r_max * abs(gz) / area)) + 1
    box_n = int(math.ceil(r_max * abs(gx) / area)) + 1

    n2s = np.arange(-box_n, box_n + 1)
    codewords = np.zeros((d, fock_dim), dtype=complex)
    for mu in range(d):
        ms = d * np.arange(-box_m, box_m + 1) + mu
        M, N2 = np.meshgrid(ms, n2s, indexing="ij")
        alphas = M * gx + N2 * gz
        weights = np.exp(-np.abs(alphas) ** 2 * damp / 2.0)
        keep = weights >= _WEIGHT_CUT * weights.max()
        alphas, weights = alphas[keep], weights[keep]
        phases = np.exp(-1j * (math.pi / d) * M[keep] * N2[keep])
        comps = _coherent_batch(alphas * shrink, fock_dim)
        vec = (weights * phases) @ comps
        vec /= np.linalg.norm(vec)
        band = max(3, fock_dim // 10)
        tail = float(np.sum(np.abs(vec[fock_dim - band:]) ** 2))
        if tail > 1e-9:
            bulk = np.abs(alphas[weights >= 1e-4 * weights.max()]).max() * shrink
            raise TruncationError(
                f"top Fock band holds {tail:.2e} of the norm at fock_dim "
                f"{fock_dim}; try >= {required_dim(bulk)} for Delta = {delta:.4g}")
        codewords[mu] = vec

    gram = codewords @ codewords.conj().T
    return FiniteEnergyGkp(lattice, d, delta, fock_dim, codewords, gram)


def loewdin_orthonormalize(vectors: np.ndarray) -> np.ndarray:
    """Symmetric orthonormalization of the rows (closest orthonormal family)."""
    gram = vectors @ vectors.conj().T
    w, V = np.linalg.eigh(gram)
    if w.min() < 1e-14 * w.max():
        raise ValueError("codeword family is numerically rank deficient")
    inv_sqrt = (V / np.sqrt(w)) @ V.conj().T
    return inv_sqrt @ vectors


def code_mixed_state(fe: FiniteEnergyGkp) -> FockDensity:
    """Equal-weight mixture of the orthonormalized codewords."""
    return FockDensity.from_unnormalized(fe.code_projector())


def mean_photon(fe: FiniteEnergyGkp) -> float:
    """Mean photon number of the equal-weight code mixture."""
    nvec = np.arange(fe.fock_dim)
    pops = np.abs(fe.orthonormal_codewords()) ** 2
    return float((pops @ nvec).mean())


def stabilizer_expectations(fe: FiniteEnergyGkp) -> tuple[complex, complex]:
    """<S_q> and <S_p> on the code mixture."""
    gq, gp = stabilizer_displacements(fe.lattice, fe.d)
    rho = code_mixed_state(fe).data
    eq = np.trace(rho @ displacement_op(gq, fe.fock_dim))
    ep = np.trace(rho @ displacement_op(gp, fe.fock_dim))
    return complex(eq), complex(ep)


def delta_for_mean_photon(lattice: GkpLattice, d: int | None, nbar_target: float,
                          fock_dim: int, lo: float = 0.05, hi: float = 2.0,
                          xtol: float = 1e-6, ftol: float = 1e-4) -> float:
    """Invert the mean photon number of the code mixture by bisection.

    The mean is strictly decreasing in Delta on [lo, hi].  Interior
    probes are evaluated at an internally enlarged cutoff when the
    caller's ``fock_dim`` cannot hold the probe's coherent components;
    the returned Delta is meant to be used at ``fock_dim``.
    """
    d = lattice.d if d is None else d
    if nbar_target <= 0:
        raise ValueError("target mean photon number must be > 0")
    if nbar_target > 100.0:
        raise ValueError("target outside the supported bracket (needs Delta < 0.05)")

    def nbar_of(delta: float) -> float:
        damp = 1.0 - math.exp(-2.0 * delta ** 2)
        # size the probe cutoff from the weight >= 1e-4 envelope core
        r_bulk = math.sqrt(2.0 * math.log(1e4) / damp)
        dim = max(fock_dim, required_dim(r_bulk * math.exp(-delta ** 2)))
        while True:
            try:
                return mean_photon(finite_energy_codewords(lattice, d, delta, dim))
            except TruncationError:
                dim = int(1.5 * dim) + 8

    f_hi = nbar_of(hi)
    if nbar_target <= f_hi:
        raise ValueError(
            f"target {nbar_target:.4g} not bracketed: mean photon at Delta = {hi} "
            f"is already {f_hi:.4g}")
    a, b = lo, hi
    while b - a > xtol:
        mid = 0.5 * (a + b)
        val = nbar_of(mid)
        if abs(val - nbar_target) <= ftol:
            return mid
        if val > nbar_target:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def logical_error_closed_form(lattice_label: str | GkpLattice, d: int,
                              eta: float) -> float:
    """Leading-exponent logical-error scaling after pure loss at
    transmissivity eta (effective displacement variance (1 - eta)/eta).

    Square cell: exp(-(pi/(4d)) eta/(1-eta)); hexagonal:
    exp(-(pi/(2 sqrt(3) d)) eta/(1-eta)).  Both equal
    exp(-r_c^2/(2 sigma^2)) for the cell's correctable radius r_c.
    Scaling only, not an absolute probability.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("transmissivity must lie in (0, 1)")
    sigma2 = (1.0 - eta) / eta
    label = lattice_label.label if isinstance(lattice_label, GkpLattice) else lattice_label
    if label == "square":
        return math.exp(-(math.pi / (4.0 * d)) / sigma2)
    if label == "hexagonal":
        return math.exp(-(math.pi / (2.0 * math.sqrt(3.0) * d)) / sigma2)
    if isinstance(lattice_label, GkpLattice):
        return math.exp(-correctable_radius(lattice_label, d) ** 2 / (2.0 * sigma2))
    raise ValueError(f"unknown lattice label {label!r}")


def closest_point_error_exponent(lattice: GkpLattice, d: int | None,
                                 sigma2: float) -> float:
    """Exponent -r_c^2/(2 sigma^2) of the closed-form scaling at variance sigma^2."""
    if sigma2 <= 0:
        raise ValueError("displacement variance must be > 0")
    return -correctable_radius(lattice, d) ** 2 / (2.0 * sigma2)


@dataclass
class McResult:
    estimate: float
    stderr: float
    errors: int
    trials: int


_MC_CHUNK = 1 << 16


def mc_logical_error(lattice: GkpLattice, d: int | None, sigma2: float,
                     trials: int, seed: int) -> McResult:
    """Monte-Carlo logical error rate of the closest-point decoder.

    Draws (dq, dp) i.i.d. normal with variance sigma2, decodes to the
    nearest point of the logical lattice sqrt(2 pi/d) S Z^2 (Babai
    rounding refined over the [-2, 2]^2 integer neighborhood, exact for
    the reduced square/hexagonal bases), and counts samples whose
    nearest point lies outside the stabilizer sublattice (both integer
    coordinates divisible by d).  Streams are chunked with fixed-size
    counter-derived substreams, so results depend only on the seed.
    """
    d = lattice.d if d is None else d
    if sigma2 < 0:
        raise ValueError("displacement variance must be >= 0")
    if trials < 1:
        raise ValueError("need at least one trial")
    basis = math.sqrt(2.0 * math.pi / d) * lattice.S
    binv = np.linalg.inv(basis)
    offs = np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3)], dtype=float)

    sigma = math.sqrt(sigma2)
    errors = 0
    done = 0
    chunk_idx = 0
    while done < trials:
        m = min(_MC_CHUNK, trials - done)
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(chunk_idx,))))
        x = rng.normal(0.0, sigma, size=(2, _MC_CHUNK))[:, :m]
        t0 = np.rint(binv @ x)
        # residual in lattice coordinates, refined over integer offsets
        best = np.full(m, np.inf)
        best_coset = np.zeros((2, m), dtype=np.int64)
        for o in offs:
            cand = t0 + o[:, None]
            r = basis @ cand - x
            dist = r[0] ** 2 + r[1] ** 2
            upd = dist < best
            best = np.where(upd, dist, best)
            best_coset[:, upd] = cand[:, upd].astype(np.int64)
        errors += int(((best_coset[0] % d != 0) | (best_coset[1] % d != 0)).sum())
        done += m
        chunk_idx += 1
    p = errors / trials
    stderr = math.sqrt(max(p * (1.0 - p), 0.0) / trials)
    return McResult(p, stderr, errors, trials)


def square_closest_point_error_exact(d: int, sigma2: float, cells: int = 40) -> float:
    """Analytic nearest-point error probability for the square cell.

    The square problem separates per quadrature: a logical shift happens
    when the noise lands closer to a non-multiple-of-d lattice point.
    Summing Gaussian mass over the off-coset Voronoi intervals gives the
    per-quadrature rate; the total is 1 - (1 - p_q)(1 - p_p).
    """
    from math import erf, sqrt
    if sigma2 == 0:
        return 0.0
    step = math.sqrt(2.0 * math.pi / d)
    s = math.sqrt(sigma2)

    def interval_mass(a: float, b: float) -> float:
        return 0.5 * (erf(b / (s * sqrt(2.0))) - erf(a / (s * sqrt(2.0))))

    p_q = 0.0
    for k in range(-cells, cells + 1):
        if k % d == 0:
            continue
        p_q += interval_mass((k - 0.5) * step, (k + 0.5) * step)
    return 1.0 - (1.0 - p_q) ** 2


def wigner_peak_angles(qs: np.ndarray, ps: np.ndarray, W: np.ndarray,
                       n_peaks: int = 6, exclusion: float = 0.6,
                       min_height: float = 0.05) -> np.ndarray:
    """Angular gaps between the dominant positive Wigner peaks.

    Finds local maxima of W (indexed W[i, j] = W(qs[i], ps[j])), drops
    everything within ``exclusion`` of the W-weighted centroid, keeps the
    ``n_peaks`` largest, and returns the sorted successive angular gaps
    (degrees) about the centroid.  A hexagonal cell gives six gaps near
    60; a square cell does not.
    """
    qs = np.asarray(qs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    dq = qs[1] - qs[0]
    size = max(3, int(round(0.4 / dq)) | 1)
    local_max = (ndimage.maximum_filter(W, size=size) == W) & (W > min_height * W.max())
    pos = W.clip(min=0.0)
    cq = float((pos.sum(axis=1) @ qs) / pos.sum())
    cp = float((pos.sum(axis=0) @ ps) / pos.sum())
    iq, ip = np.nonzero(local_max)
    x, y = qs[iq] - cq, ps[ip] - cp
    r = np.hypot(x, y)
    far = r > exclusion
    if far.sum() < n_peaks:
        raise ValueError("not enough off-center peaks for an angular analysis")
    order = np.argsort(W[iq[far], ip[far]])[::-1][:n_peaks]
    ang = np.sort(np.degrees(np.arctan2(y[far][order], x[far][order])))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 360.0]]))
    return np.sort(gaps)
