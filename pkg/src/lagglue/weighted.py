"""Radius function, weighted Sobolev norms and the residual decay scan."""
import math
from dataclasses import dataclass

import numpy as np

from .cone import smooth_step


@dataclass(frozen=True)
class WeightSpec:
    """Weight data of W^{k,p}_{beta,gamma,t}: density e^{beta f/2} rho^{-gamma + j} |grad^j u|."""

    k: int = 1
    p: float = 2.0
    beta: float = -0.5
    gamma: float = -0.5

    def check_analysis_range(self, m):
        if not (-1.0 < self.beta < 0.0 and 2 - m < self.gamma < 0.0):
            raise ValueError(f"analysis presets need beta in (-1, 0) and gamma in ({2 - m}, 0)")
        return self

    def shifted(self, dbeta, dgamma, k=None):
        """Spec of W^{k', p}_{beta + dbeta, gamma + dgamma}."""
        return WeightSpec(self.k if k is None else k, self.p, self.beta + dbeta, self.gamma + dgamma)


@dataclass(frozen=True)
class RadiusField:
    """rho_t as a function of the distance r to the singular point.

    rho = t r_hat on the neck with r_hat = R_hat Phi(r / (t R_hat)),
    Phi(s) = (1 + s^2)/2 for s < 1 and s otherwise, so rho = r once
    r >= t R_hat; rho is then blended to 1 over [eps, 2 eps].
    """

    t: float
    R_hat: float = 0.6
    eps: float = 0.5

    def r_hat(self, r):
        s = np.asarray(r, float) / (self.t * self.R_hat)
        return self.R_hat * np.where(s < 1.0, 0.5 * (1.0 + s * s), s)

    def __call__(self, r):
        r = np.asarray(r, float)
        inner = self.t * self.r_hat(r)
        chi, _, _ = smooth_step(r / self.eps)
        return (1.0 - chi) * inner + chi


def rho_eval(field, r_amb, region=None):
    """Radius function at nodes; ``region`` is accepted for symmetry with the tags."""
    return field(r_amb)


def deterministic_sum(values):
    """Exactly rounded sum, hence independent of the summation order."""
    return math.fsum(np.asarray(values, float).ravel().tolist())


def norm_density(u, grad_norm, rho, f, spec, m):
    """Pointwise sum_j |e^{beta f/2} rho^{-gamma+j} grad^j u|^p rho^{-m}."""
    u = np.asarray(u, float)
    base = np.exp(0.5 * spec.beta * np.asarray(f)) * np.asarray(rho) ** (-spec.gamma)
    dens = np.abs(base * u) ** spec.p
    if spec.k >= 1:
        if grad_norm is None:
            from .errors import IncompleteField
            raise IncompleteField("gradient samples required for k >= 1")
        dens = dens + np.abs(base * rho * np.asarray(grad_norm)) ** spec.p
    if spec.k > 1:
        raise ValueError("field norms support k <= 1")
    return dens * np.asarray(rho) ** (-m)


def weighted_norm(u, grad_norm, weights, rho, f, spec, m, regions=None):
    """Weighted W^{k,p} norm from samples with quadrature weights for dV.

    Returns the norm, and with ``regions`` also a dict of per-region
    p-th powers (which add up to the total p-th power).
    """
    dens = norm_density(u, grad_norm, rho, f, spec, m) * np.asarray(weights)
    total = deterministic_sum(dens)
    norm = total ** (1.0 / spec.p)
    if regions is None:
        return norm
    regions = np.asarray(regions)
    parts = {int(k): deterministic_sum(dens[regions == k]) for k in np.unique(regions)}
    return norm, parts


def fit_slope(ts, values, exclude_largest=None):
    """Least-squares slope of log(values) against log(ts).

    With five or more points the largest t is excluded by default
    (pre-asymptotic); ``exclude_largest`` overrides that rule.
    """
    ts = np.asarray(ts, float)
    values = np.asarray(values, float)
    order = np.argsort(ts)
    ts, values = ts[order], values[order]
    if exclude_largest is None:
        exclude_largest = ts.size >= 5
    if exclude_largest:
        ts, values = ts[:-1], values[:-1]
    ok = values > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ts[ok]), np.log(values[ok]), 1)[0])


def predicted_exponent(m, tau, gamma):
    return tau * (2.0 - gamma) + (1.0 - tau) * m
