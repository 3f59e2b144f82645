"""t-sweeps of the glued residual: weighted norm decay and pointwise bounds."""
from dataclasses import dataclass

import numpy as np

from .glue import INNER_ANNULUS, NECK_CORE, TRANSITION, WING
from .mesh import Resolution, sample_mesh
from .weighted import WeightSpec, fit_slope, predicted_exponent, weighted_norm


@dataclass
class ScanReport:
    """Per-t weighted residual norms with the fitted and predicted decay exponents."""

    ts: np.ndarray
    norms: np.ndarray
    region_norms: dict
    rho_min: np.ndarray
    nodes: np.ndarray
    slope: float
    predicted: float
    region_slopes: dict

    @property
    def deviation(self):
        return (self.slope - self.predicted) / self.predicted

    def rows(self):
        names = {NECK_CORE: "norm_I", INNER_ANNULUS: "norm_II", TRANSITION: "norm_III"}
        out = []
        for i, t in enumerate(self.ts):
            row = dict(t=float(t), norm_total=float(self.norms[i]))
            for k, name in names.items():
                row[name] = float(self.region_norms[k][i])
            row.update(rho_min=float(self.rho_min[i]), nodes=int(self.nodes[i]))
            out.append(row)
        return out

    def summary(self):
        return dict(slope=self.slope, predicted=self.predicted, deviation=self.deviation,
                    region_slopes={str(k): v for k, v in self.region_slopes.items()},
                    wing_norm_max=float(np.max(self.region_norms[WING])))


def error_scan(surface, ts, spec=WeightSpec(), resolution=Resolution(), progress=None):
    """||Theta||_{W^{k,p}_{beta+1,gamma-2,t}} of the glued surface for each t.

    ``surface`` supplies the configuration and gluing parameters; it is
    rebuilt at every t with :meth:`GluedSurface.with_t`.
    """
    ts = np.asarray(sorted(ts), float)
    if ts[-1] / ts[0] < 5.0:
        raise ValueError("t-list must span at least a factor of 5")
    out_spec = spec.shifted(1.0, -2.0)
    norms, rho_min, nodes = [], [], []
    parts = {k: [] for k in (NECK_CORE, INNER_ANNULUS, TRANSITION, WING)}
    for t in ts:
        ms = sample_mesh(surface.with_t(t), resolution)
        n, pp = weighted_norm(ms.theta, ms.grad_theta, ms.weights, ms.rho, ms.f, out_spec, surface.m, ms.region)
        norms.append(n)
        for k in parts:
            parts[k].append(pp.get(k, 0.0) ** (1.0 / out_spec.p))
        rho_min.append(float(ms.rho.min()))
        nodes.append(ms.size)
        if progress is not None:
            progress(t, n)
    norms = np.array(norms)
    region_norms = {k: np.array(v) for k, v in parts.items()}
    region_slopes = {k: fit_slope(ts, region_norms[k]) for k in (NECK_CORE, INNER_ANNULUS, TRANSITION)}
    return ScanReport(ts, norms, region_norms, np.array(rho_min), np.array(nodes), fit_slope(ts, norms),
                      predicted_exponent(surface.m, surface.tau, spec.gamma), region_slopes)


def region_trend_exponents(m, tau, gamma):
    """Per-region decay exponents of the residual norm: neck core, inner annulus, transition."""
    return {NECK_CORE: 3.0 - gamma, INNER_ANNULUS: (3.0 - gamma) * tau, TRANSITION: predicted_exponent(m, tau, gamma)}


@dataclass
class PointwiseProfile:
    """Sup-norm bounds of the residual by region."""

    t: float
    wing_max: float
    annulus_bins: np.ndarray
    annulus_sup: np.ndarray
    neck_sup_over_t: float

    @property
    def annulus_variation(self):
        s = self.annulus_sup[self.annulus_sup > 0]
        return float(s.max() / s.min())


def pointwise_profile(surface, resolution=Resolution(n_polar=8, panels_per_unit=4), n_bins=6):
    """Sup of |Theta| on the wing, of |Theta|/r in r-bins of the inner annulus and of |Theta|/t on the neck core."""
    ms = sample_mesh(surface, resolution, with_gradient=False)
    b = surface.boundaries
    th = np.abs(ms.theta)
    wing = ms.r >= b["2t_tau"]
    ann = ms.region == INNER_ANNULUS
    edges = np.geomspace(b["t_R_hat"], b["t_tau"], n_bins + 1)
    which = np.digitize(ms.r_amb[ann], edges) - 1
    ratio = th[ann] / ms.r_amb[ann]
    sup = np.array([ratio[which == i].max() if np.any(which == i) else 0.0 for i in range(n_bins)])
    neck = ms.region == NECK_CORE
    return PointwiseProfile(surface.t, float(th[wing].max(initial=0.0)), edges, sup,
                            float(th[neck].max(initial=0.0) / surface.t))
