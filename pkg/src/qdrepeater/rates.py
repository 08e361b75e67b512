"""Closed-form entanglement-distribution rate model for a nested repeater chain.

All functions are pure; a chain configuration is summarized by a
:class:`RateResult`.  Unreachable configurations (a vanishing success
probability) are flagged rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import LinkParams, ParameterSet, with_link


@dataclass(frozen=True)
class RateResult:
    """Success probabilities and mean waiting time for one chain configuration."""

    p0: float          # elementary-link success probability per attempt
    p_swap: float      # swap success probability per attempt
    mean_time: float   # seconds; inf when unreachable
    rate: float        # Hz; 0 when unreachable
    scheme_tag: str    # parallel | sequential | two_plus_two | direct

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.mean_time)


def transmission_probability(L0: float, L_att: float) -> float:
    """Photon transmission probability over half a link, exp(-L0/(2*L_att))."""
    if L_att <= 0:
        raise ValueError("attenuation length must be positive")
    if L0 < 0:
        raise ValueError("link length must be non-negative")
    return math.exp(-L0 / (2.0 * L_att))


def branching_ratio(F_p: float) -> float:
    """Branching ratio (1+F_p)/(2+F_p) of two equal decay paths, one enhanced."""
    return (1.0 + F_p) / (2.0 + F_p)


def link_success_probability(link: LinkParams, L0: float | None = None) -> float:
    """Two-photon heralding success probability of one elementary link.

    p0 = 0.5 * (zeta * eta_t * p * eta_c * eta_d * eta_fc)**2.  Frequency
    conversion enters per photon, so its efficiency is squared along with the
    rest of the per-photon budget.
    """
    if L0 is None:
        L0 = link.L0
    eta_t = transmission_probability(L0, link.L_att)
    amp = (link.zeta * eta_t * link.p_emit * link.eta_c * link.eta_d
           * link.eta_fc)
    return 0.5 * amp * amp


def swap_success_probability(link: LinkParams) -> float:
    """Heralded photon-scattering gate success, eta_s*eta_c*eta_cav*eta_d."""
    return link.eta_s * link.eta_c * link.eta_cav * link.eta_d


def _mean_time(params: ParameterSet, prefactor: float, tag: str,
               include_init: bool = True) -> RateResult:
    link = params.link
    L0 = link.L0
    p0 = link_success_probability(link, L0)
    ps = swap_success_probability(link)
    slot = L0 / link.c_fiber + (link.tau_init if include_init else 0.0)
    denom = p0 * ps**link.n_nest
    if denom <= 0.0:
        return RateResult(p0=p0, p_swap=ps, mean_time=math.inf, rate=0.0,
                          scheme_tag=tag)
    mean = prefactor * slot / denom
    rate = 1.0 / mean if mean > 0.0 else math.inf
    return RateResult(p0=p0, p_swap=ps, mean_time=mean, rate=rate,
                      scheme_tag=tag)


def mean_time_parallel(params: ParameterSet) -> RateResult:
    """Mean distribution time with all links generated in parallel.

    <T> = (3/2)**n * (L0/c + tau_init) / (p0 * p_s**n); the n = 0 case is the
    plain geometric mean (L0/c + tau_init)/p0.
    """
    n = params.link.n_nest
    return _mean_time(params, 1.5**n, "parallel")


def mean_time_sequential(params: ParameterSet) -> RateResult:
    """Mean distribution time when neighboring links are generated one-by-one.

    Prefactor 2*(3/2)**(n-1) for n >= 1.  A single link (n = 0) has no
    neighbor, so the parallel value is returned.
    """
    n = params.link.n_nest
    if n == 0:
        result = _mean_time(params, 1.0, "sequential")
        return result
    return _mean_time(params, 2.0 * 1.5 ** (n - 1), "sequential")


def mean_time_two_plus_two(params: ParameterSet) -> RateResult:
    """Mean distribution time for the photon-pair-source comparison scheme.

    p0' = 0.5*(eta_t*eta_s*eta_d)**2 per link and p_s' = 0.5*eta_d**2*eta_m**4
    per two-photon Bell measurement; valid when memory initialization and
    decay are negligible, so no tau_init term appears.
    """
    link = params.link
    n = link.n_nest
    L0 = link.L0
    eta_t = transmission_probability(L0, link.L_att)
    p0 = 0.5 * (eta_t * link.eta_s * link.eta_d) ** 2
    ps = 0.5 * link.eta_d**2 * link.eta_m**4
    slot = L0 / link.c_fiber
    denom = p0 * ps**n
    if denom <= 0.0:
        return RateResult(p0=p0, p_swap=ps, mean_time=math.inf, rate=0.0,
                          scheme_tag="two_plus_two")
    mean = 1.5**n * slot / denom
    rate = 1.0 / mean if mean > 0.0 else math.inf
    return RateResult(p0=p0, p_swap=ps, mean_time=mean, rate=rate,
                      scheme_tag="two_plus_two")


def direct_transmission_rate(L: float, source_rate: float, L_att: float) -> float:
    """Photon arrival rate of a repeaterless source through lossy fiber."""
    if L < 0:
        raise ValueError("distance must be non-negative")
    if L_att <= 0:
        raise ValueError("attenuation length must be positive")
    return source_rate * math.exp(-L / L_att)


def crossover_distance(params: ParameterSet, source_rate: float = 1e10,
                       lo: float = 1e3, hi: float = 2000e3,
                       tol: float = 1.0) -> float | None:
    """Distance where the repeater rate first beats direct transmission.

    Bisection on the (monotone-difference) closed forms; returns None when no
    sign change exists in [lo, hi].
    """
    def gap(L: float) -> float:
        r = mean_time_parallel(with_link(params, L_total=L)).rate
        return r - direct_transmission_rate(L, source_rate, params.link.L_att)

    glo, ghi = gap(lo), gap(hi)
    if glo > 0:
        return lo
    if ghi < 0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
