"""Quantum-capacity bounds for one-mode thermal attenuators.

Everything is expressed in bits (base-2 logarithms) through the bosonic
entropy function g(x) = (x+1)log2(x+1) - x log2(x).  The upper bounds
come from data processing through amplifier/loss splits of the thermal
attenuator N[eta, nth] (see :mod:`gkpcap.gaussian`), the lower bounds
from the coherent information of thermal inputs and from achievable
rates of grid codes.

Bound family at mean input photon number nbar:

* ``thermal_loss_ci_lower``   coherent-information lower bound
* ``hw_bound``                two-way-assisted upper bound
* ``dp_bound``                amplifier-after-loss data processing
* ``idp_bound``               loss-after-amplifier data processing
* ``odp_bound``               optimized three-factor data processing
* ``gkp_rate_loss``           achievable rate of square grid codes
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .gaussian import (
    DecompositionError,
    decompose_general,
    decompose_post_amp,
    decompose_pre_amp,
)

_G_GUARD = 1e-12


def g_entropy(x: float) -> float:
    """Entropy g(x) = (x+1)log2(x+1) - x log2(x) of a thermal state in bits."""
    if x < 0:
        raise ValueError(f"g is defined for x >= 0; got {x:.6g}")
    if x < _G_GUARD:
        return 0.0
    if math.isinf(x):
        return math.inf
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")


def pure_loss_capacity(eta: float, nbar: float = math.inf) -> float:
    """Capacity of the pure-loss channel under a mean-photon constraint.

    Finite nbar: max[g(eta nbar) - g((1-eta) nbar), 0].  Unconstrained:
    max[log2(eta/(1-eta)), 0], with +inf at eta = 1.
    """
    _check_eta(eta)
    if math.isinf(nbar):
        if eta == 1.0:
            return math.inf
        if eta <= 0.5:
            return 0.0
        return math.log2(eta / (1.0 - eta))
    if nbar < 0:
        raise ValueError("mean photon number must be >= 0")
    return max(g_entropy(eta * nbar) - g_entropy((1.0 - eta) * nbar), 0.0)


def thermal_loss_ci_lower(eta: float, nth: float, nbar: float = math.inf) -> float:
    """Coherent information of a thermal input through N[eta, nth], clamped at 0."""
    _check_eta(eta)
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    if math.isinf(nbar):
        if eta == 1.0:
            return math.inf
        if eta <= 0.5:
            return 0.0
        return max(math.log2(eta / (1.0 - eta)) - g_entropy(nth), 0.0)
    # finite-energy coherent information of the two-mode squeezed input
    D = math.sqrt(max(((1.0 + eta) * nbar + (1.0 - eta) * nth + 1.0) ** 2
                      - 4.0 * eta * nbar * (nbar + 1.0), 0.0))
    skew = (1.0 - eta) * (nbar - nth)
    ic = (g_entropy(eta * nbar + (1.0 - eta) * nth)
          - g_entropy(max((D + skew - 1.0) / 2.0, 0.0))
          - g_entropy(max((D - skew - 1.0) / 2.0, 0.0)))
    return max(ic, 0.0)


def hw_bound(eta: float, nth: float) -> float:
    """Squashed-entanglement-style upper bound max[log2((1+eta)/((1-eta)(2 nth + 1))), 0]."""
    _check_eta(eta)
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    if eta == 1.0:
        return math.inf
    return max(math.log2((1.0 + eta) / ((1.0 - eta) * (2.0 * nth + 1.0))), 0.0)


def dp_bound(eta: float, nth: float, nbar: float = math.inf) -> float:
    """Data processing through the amplifier-after-loss split.

    The trailing amplifier is discarded, leaving a pure-loss channel of
    transmissivity eta' = eta/((1-eta) nth + 1) on the original input.
    """
    if eta == 0.0:
        return 0.0
    eta_p, _ = decompose_post_amp(eta, nth)
    return pure_loss_capacity(eta_p, nbar)


def idp_bound(eta: float, nth: float, nbar: float = math.inf) -> float:
    """Data processing through the loss-after-amplifier split.

    The leading amplifier boosts the input energy to G~' nbar + (G~' - 1)
    before the pure-loss stage of transmissivity eta~' = eta - (1-eta) nth.
    Returns 0 when that split does not exist.
    """
    if eta == 0.0:
        return 0.0
    try:
        eta_t, G_t = decompose_pre_amp(eta, nth)
    except DecompositionError:
        return 0.0
    if math.isinf(nbar):
        return pure_loss_capacity(eta_t)
    return pure_loss_capacity(eta_t, G_t * nbar + (G_t - 1.0))


def idp_bound_closed_form(eta: float, nth: float, nbar: float) -> float:
    """Simplified two-term expression for the finite-energy idp bound.

    Algebraically identical to ``idp_bound``; kept as an independent
    cross-check route and compared in the test suite.
    """
    _check_eta(eta)
    eta_t = eta - (1.0 - eta) * nth
    if eta_t <= 0.0:
        return 0.0
    mean_out = eta * nbar + (1.0 - eta) * nth
    return max(g_entropy(mean_out)
               - g_entropy((1.0 - eta) * (nth + 1.0) * mean_out / eta_t), 0.0)


def _odp_objective(eta: float, nth: float, nbar: float, G1: float) -> float:
    try:
        _, eta_bar, G2 = decompose_general(eta, nth, G1)
    except DecompositionError:
        # degenerate split: the middle stage absorbs everything, rate 0
        return 0.0
    return pure_loss_capacity(eta_bar, G2 * nbar + (G2 - 1.0))


def _golden_min(f, a: float, b: float, xtol: float, ftol: float) -> float:
    """Golden-section minimum of a unimodal nonnegative function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc < ftol and fd < ftol:
            break   # f >= 0, so this is a global minimum to within ftol
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return min(fc, fd)


def odp_bound(eta: float, nth: float, nbar: float) -> float:
    """Upper bound minimized over all three-factor amplifier/loss splits.

    Evaluates the data-processed rate at both endpoint splits and runs a
    golden-section search over the interior gain G1 in
    [1, 1 + (1-eta) nth]; requires a finite input energy nbar.
    """
    _check_eta(eta)
    if math.isinf(nbar):
        raise ValueError("odp bound is defined for finite input energy only")
    if nbar < 0:
        raise ValueError("mean photon number must be >= 0")
    if eta == 0.0:
        return 0.0
    gmax = 1.0 + (1.0 - eta) * nth
    f = lambda G1: _odp_objective(eta, nth, nbar, G1)
    best = min(f(1.0), f(gmax))
    if gmax > 1.0:
        best = min(best, _golden_min(f, 1.0, gmax, 1e-9, 1e-12))
    return best


def crossover_eta_star(nth: float, nbar: float, coincide_tol: float = 1e-9,
                       eta_tol: float = 1e-5) -> float:
    """Smallest transmissivity at which the odp bound meets the dp bound.

    Above the crossover the trailing-amplifier split is optimal and the
    two bounds agree to within ``coincide_tol`` bits; below it the
    optimized split is strictly better.  Located by bisection after a
    coarse scan; degenerate families (nth = 0, where every split
    coincides) report 0.
    """
    if nth == 0.0:
        return 0.0
    gap = lambda e: dp_bound(e, nth, nbar) - odp_bound(e, nth, nbar)
    etas = [0.02 + 0.005 * k for k in range(196)]   # 0.02 .. 0.995
    split = [e for e in etas if gap(e) > coincide_tol]
    if not split:
        return 0.0
    lo = split[-1]
    hi = next(e for e in etas if e > lo)
    while hi - lo > eta_tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > coincide_tol:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class DisplacementBounds(NamedTuple):
    lower: float
    upper_loose: float
    upper_improved: float


def displacement_bounds(sigma2: float) -> DisplacementBounds:
    """Capacity bounds for the random-displacement channel of variance sigma^2.

    lower = max[log2(1/(e sigma^2)), 0], upper_loose = max[log2(1/sigma^2), 0],
    upper_improved = max[log2((1 - sigma^2)/sigma^2), 0].
    """
    if sigma2 <= 0:
        raise ValueError("displacement variance must be > 0")
    lower = max(math.log2(1.0 / (math.e * sigma2)), 0.0)
    loose = max(math.log2(1.0 / sigma2), 0.0)
    improved = max(math.log2((1.0 - sigma2) / sigma2), 0.0) if sigma2 < 1.0 else 0.0
    return DisplacementBounds(lower, loose, improved)


def gkp_rate_displacement(sigma2: float) -> float:
    """Achievable rate max[log2 floor(1/(e sigma^2)), 0] of square grid codes."""
    if sigma2 <= 0:
        raise ValueError("displacement variance must be > 0")
    k = math.floor(1.0 / (math.e * sigma2))
    return math.log2(k) if k >= 1 else 0.0


def gkp_rate_loss(eta: float, nth: float = 0.0) -> float:
    """Grid-code rate through N[eta, nth] via the loss-after-amplifier split.

    The relevant effective displacement variance is the pre-amplification
    one, sigma~^2 = (1 - eta)(nth + 1).
    """
    _check_eta(eta)
    if nth < 0:
        raise ValueError("environment photon number must be >= 0")
    if eta == 1.0:
        return math.inf
    return gkp_rate_displacement((1.0 - eta) * (nth + 1.0))


@dataclass
class BoundPoint:
    """Full bound family evaluated at one (eta, nth, nbar) point."""

    eta: float
    nth: float
    nbar: float
    lower_ci: float
    hw: float
    dp: float
    idp: float
    odp: float | None
    gkp_rate: float

    def validate(self, tol: float = 1e-9) -> None:
        uppers = [self.hw, self.dp, self.idp] + ([self.odp] if self.odp is not None else [])
        vals = [self.lower_ci, self.gkp_rate] + uppers
        if any(v < 0 for v in vals):
            raise ValueError("bounds must be nonnegative")
        if any(self.lower_ci > u + tol for u in uppers):
            raise ValueError("lower bound exceeds an upper bound")


def bound_point(eta: float, nth: float, nbar: float = math.inf) -> BoundPoint:
    """Evaluate the whole bound family at one channel/energy point."""
    return BoundPoint(
        eta=eta, nth=nth, nbar=nbar,
        lower_ci=thermal_loss_ci_lower(eta, nth, nbar),
        hw=hw_bound(eta, nth),
        dp=dp_bound(eta, nth, nbar),
        idp=idp_bound(eta, nth, nbar),
        odp=None if math.isinf(nbar) else odp_bound(eta, nth, nbar),
        gkp_rate=gkp_rate_loss(eta, nth),
    )
