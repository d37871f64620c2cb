"""Preset simulation pipelines emitting structured result tables.

Four presets cover the standard demonstrations of winsorized PCA:

* ``run_effect_of_radius`` sweeps the radius on a single-spike model with and
  without contamination, for Gaussian and heavy-tailed data ("fig1").
* ``run_high_dim`` compares small / moderate / large radius policies as the
  dimension grows, on spiked and non-spiked models ("fig2").
* ``run_breakdown_bounds`` traces both breakdown-point lower bounds across a
  radius grid ("fig3").
* ``run_perturbation_sweep`` contaminates one dataset row by row and plots
  the observed angle against the deterministic perturbation bounds ("fig4").

Radius grids are anchored at quantiles of a reference draw (the recipes do
not pin exact grids); the anchors land in each table's metadata so every run
is regenerable from its header alone.  All tables are deterministic functions
of (preset arguments, seed).
"""

from __future__ import annotations

import datetime
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import (
    perturbation_bound,
    sample_winsorized_spectrum,
    wpca_breakdown_lower_bounds,
)
from .distributions import PopulationModel, make_rng
from .simulate import (
    ContaminationPlan,
    CoordinateSpike,
    ConstantVector,
    apply_contamination,
    map_replications,
)
from .subspace import fit_pc_subspace, principal_angles
from .transform import RadiusSpec, row_norms

__all__ = [
    "ResultTable",
    "run_effect_of_radius",
    "run_high_dim",
    "run_breakdown_bounds",
    "run_perturbation_sweep",
    "PRESETS",
]

# Spawn-key offset reserved for grid-anchoring reference draws, far above
# any replication index so the two stream families never collide.
_REF_KEY = 1_000_000


def format_value(v) -> str:
    """CSV cell formatting: 17 significant digits, '+inf' sentinel, '' for None."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class ResultTable:
    """Columns, rows, and reproducibility metadata for one experiment run."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def csv_text(self, timestamp: bool = True) -> str:
        out = io.StringIO()
        for key, val in self.metadata.items():
            out.write(f"# {key}={val}\n")
        if timestamp:
            now = datetime.datetime.now(datetime.timezone.utc)
            out.write(f"# timestamp={now.isoformat()}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(format_value(v) for v in row) + "\n")
        return out.getvalue()


def _base_metadata(preset: str, seed: int, **extra) -> dict[str, str]:
    meta = {"preset": preset, "seed": str(int(seed)), "build": f"winpca-{__version__}"}
    for key, val in extra.items():
        meta[key] = val if isinstance(val, str) else format_value(val)
    return meta


def _mean_se(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # stack axis 0 is replications
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        se = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
    else:
        se = np.full(mean.shape, math.nan)
    return mean, se


def run_effect_of_radius(
    scale: float = 1.0, seed: int = 42, n_radii: int = 30, jobs: int = 1
) -> ResultTable:
    """Loss versus winsorization radius on a single-spike model ("fig1").

    The model is p=100, leading eigenvalue 100 over a unit bulk, d=1, with
    n=200*scale rows and 100*scale replications per cell.  Cells are the
    product of distribution (gaussian, t3) and contamination level (0, 0.05,
    spiking coordinate 2 at magnitude 100*n*p); the radius grid is log-spaced
    from 0.05x the median reference norm to 2x the max, plus a no-winsorize
    endpoint reported with radius +inf.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    p, d = 100, 1
    n = max(4, round(200 * scale))
    reps = max(2, round(100 * scale))
    eigs = np.concatenate(([100.0], np.ones(p - 1)))
    eps_levels = (0.0, 0.05)
    target = np.eye(p, d)
    table = ResultTable(
        ("distribution", "epsilon", "radius_kind", "radius", "statistic",
         "value", "std_error"),
        metadata=_base_metadata("fig1", seed, scale=scale, n=n, p=p, d=d,
                                replications=reps),
    )
    models = (
        ("gaussian", PopulationModel.gaussian(eigs)),
        ("t3", PopulationModel.student_t(eigs, 3.0)),
    )
    for di, (dist, model) in enumerate(models):
        ref = model.draw(n, make_rng(seed, (di, _REF_KEY)))
        norms = row_norms(ref)
        grid = np.geomspace(0.05 * float(np.median(norms)),
                            2.0 * float(norms.max()), n_radii)
        table.metadata[f"r_grid_{dist}"] = (
            f"geomspace({format_value(grid[0])},{format_value(grid[-1])},{n_radii})"
        )

        def one(rep: int, model=model, di=di, grid=grid) -> np.ndarray:
            rng = make_rng(seed, (di, rep))
            X0 = model.draw(n, rng)
            out = np.empty((len(eps_levels), n_radii + 1))
            for ei, eps in enumerate(eps_levels):
                m = round(eps * n)
                if m:
                    plan = ContaminationPlan(
                        m, CoordinateSpike(1, 100.0 * n * p))
                    X = apply_contamination(X0, plan)
                else:
                    X = X0
                for ri, r in enumerate(grid):
                    fit = fit_pc_subspace(X, d, RadiusSpec.fixed(r))
                    out[ei, ri] = principal_angles(fit.basis, target).sin_largest
                fit = fit_pc_subspace(X, d, RadiusSpec.none())
                out[ei, n_radii] = principal_angles(fit.basis, target).sin_largest
            return out

        stack = np.stack(map_replications(one, reps, jobs))
        mean, se = _mean_se(stack)
        for ei, eps in enumerate(eps_levels):
            for ri, r in enumerate(grid):
                table.add(dist, eps, "fixed", float(r), "mean_sin_theta",
                          float(mean[ei, ri]), float(se[ei, ri]))
            table.add(dist, eps, "pca", math.inf, "mean_sin_theta",
                      float(mean[ei, n_radii]), float(se[ei, n_radii]))
    return table


def run_high_dim(
    scale: float = 0.2, seed: int = 42, replications: int = 10,
    filler: float = 1.0, jobs: int = 1,
) -> ResultTable:
    """Loss of three radius policies as dimension grows ("fig2").

    For k in 1..4: p = round(1000*scale)*k and n = 2*k*p, so p/n = 1/(2k)
    shrinks as p grows.  Radii are 1, sqrt(p), and sqrt(p log p); models are
    non-spiked diag(9, 4, filler...) and spiked diag(9 sqrt(p), 4 sqrt(p),
    filler...); d=2; two rows are replaced by a spike of magnitude n*p in
    coordinate 3.  The same whitened draw feeds both models within a
    replication, pairing their losses.
    """
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    if not float(filler) > 0:
        raise ValueError("filler eigenvalue must be positive")
    base = max(2, round(1000 * scale))
    d, m_out = 2, 2
    table = ResultTable(
        ("k", "p", "n", "distribution", "model", "radius_label", "radius",
         "statistic", "value", "std_error"),
        metadata=_base_metadata("fig2", seed, scale=scale, replications=replications,
                                filler=float(filler), base_p=base),
    )
    dists = ("gaussian", "t3")
    for ki, k in enumerate((1, 2, 3, 4)):
        p = base * k
        n = 2 * k * p
        radii = (
            ("r_1", 1.0),
            ("r_sqrt_p", math.sqrt(p)),
            ("r_sqrt_plogp", math.sqrt(p * math.log(p))),
        )
        fill = np.full(p - d, float(filler))
        model_eigs = (
            ("non_spiked", np.concatenate(([9.0, 4.0], fill))),
            ("spiked", np.concatenate(([9.0 * math.sqrt(p), 4.0 * math.sqrt(p)], fill))),
        )
        plan = ContaminationPlan(m_out, CoordinateSpike(d, float(n) * p))
        target = np.eye(p, d)
        for zi, dist in enumerate(dists):
            whitener = (PopulationModel.gaussian(np.ones(p)) if dist == "gaussian"
                        else PopulationModel.student_t(np.ones(p), 3.0))

            def one(rep: int, whitener=whitener, ki=ki, zi=zi, p=p, n=n,
                    radii=radii, model_eigs=model_eigs, plan=plan,
                    target=target) -> np.ndarray:
                rng = make_rng(seed, (ki, zi, rep))
                y = whitener.draw_whitened(n, rng)
                out = np.empty((len(model_eigs), len(radii)))
                for mi, (_, eigs) in enumerate(model_eigs):
                    X = apply_contamination(y * np.sqrt(eigs), plan)
                    for ri, (_, r) in enumerate(radii):
                        fit = fit_pc_subspace(X, d, RadiusSpec.fixed(r))
                        out[mi, ri] = principal_angles(fit.basis, target).sin_largest
                return out

            stack = np.stack(map_replications(one, int(replications), jobs))
            mean, se = _mean_se(stack)
            for mi, (mname, _) in enumerate(model_eigs):
                for ri, (rlabel, r) in enumerate(radii):
                    table.add(k, p, n, dist, mname, rlabel, float(r),
                              "mean_sin_theta", float(mean[mi, ri]), float(se[mi, ri]))
    return table


def run_breakdown_bounds(
    seed: int = 42, replications: int = 1000, n_radii: int = 40, jobs: int = 1
) -> ResultTable:
    """Breakdown-point lower bounds across a radius grid ("fig3").

    Gaussian data with n=1000, p=4, covariance diag(25, 25, 5, 1), d=2.  Per
    radius the winsorized sample spectrum yields the weak and strong
    breakdown lower bounds; means and standard errors are reported over the
    replications.  The grid is log-spaced over [0.1 median norm, 3 max norm]
    of a reference draw.
    """
    n, p, d = 1000, 4, 2
    if int(replications) < 1:
        raise ValueError("need at least one replication")
    model = PopulationModel.gaussian(np.array([25.0, 25.0, 5.0, 1.0]))
    ref = model.draw(n, make_rng(seed, (_REF_KEY,)))
    norms = row_norms(ref)
    grid = np.geomspace(0.1 * float(np.median(norms)), 3.0 * float(norms.max()),
                        int(n_radii))
    table = ResultTable(
        ("radius", "statistic", "value", "std_error"),
        metadata=_base_metadata(
            "fig3", seed, n=n, p=p, d=d, replications=int(replications),
            r_grid=f"geomspace({format_value(grid[0])},{format_value(grid[-1])},{int(n_radii)})",
        ),
    )

    def one(rep: int) -> np.ndarray:
        rng = make_rng(seed, (rep,))
        X = model.draw(n, rng)
        out = np.empty((grid.size, 2))
        for ri, r in enumerate(grid):
            wspec = sample_winsorized_spectrum(X, r)
            out[ri] = wpca_breakdown_lower_bounds(wspec, d)
        return out

    stack = np.stack(map_replications(one, int(replications), jobs))
    mean, se = _mean_se(stack)
    for ri, r in enumerate(grid):
        table.add(float(r), "weak_lb", float(mean[ri, 0]), float(se[ri, 0]))
        table.add(float(r), "strong_lb", float(mean[ri, 1]), float(se[ri, 1]))
    return table


def run_perturbation_sweep(
    seed: int = 42, n: int = 1000, m_max: int | None = None
) -> ResultTable:
    """Observed angle versus perturbation bounds on one dataset ("fig4").

    One Gaussian draw with n rows, p=2, covariance diag(25, 1), d=1; the
    radius is the median row norm.  For m = 0 .. m_max (default n/2 - 1) the
    first m rows are replaced by (0, max norm squared + 100) and the fitted
    subspace is compared with the fit on the pure data.  Rows carry both
    deterministic bounds (the sharper one blank where its validity condition
    fails) and the weak breakdown lower bound of the pure fit as a constant
    marker column.
    """
    p, d = 2, 1
    n = int(n)
    if n < 4:
        raise ValueError("need n >= 4")
    if m_max is None:
        m_max = n // 2 - 1
    m_max = int(m_max)
    if not 0 <= m_max < n / 2:
        raise ValueError("m_max must keep the contamination fraction below 1/2")
    model = PopulationModel.gaussian(np.array([25.0, 1.0]))
    X0 = model.draw(n, make_rng(seed))
    norms = row_norms(X0)
    r = float(np.median(norms))
    wspec = sample_winsorized_spectrum(X0, r)
    fit0 = fit_pc_subspace(X0, d, RadiusSpec.fixed(r))
    weak_lb, strong_lb = wpca_breakdown_lower_bounds(wspec, d)
    outlier = ConstantVector((0.0, float(norms.max()) ** 2 + 100.0))
    table = ResultTable(
        ("m", "epsilon", "observed_angle", "observed_sin", "bound1", "bound2",
         "min_bound", "weak_lb"),
        metadata=_base_metadata(
            "fig4", seed, n=n, p=p, d=d, radius=r,
            outlier=format_value(outlier.values[1]),
            weak_lb=weak_lb, strong_lb=strong_lb,
        ),
    )
    lam_d, lam_d1 = float(wspec.values[0]), float(wspec.values[1])
    for m in range(m_max + 1):
        eps = m / n
        if m:
            X = apply_contamination(X0, ContaminationPlan(m, outlier))
            fit = fit_pc_subspace(X, d, RadiusSpec.fixed(r))
        else:
            fit = fit0
        report = principal_angles(fit.basis, fit0.basis)
        bd = perturbation_bound(lam_d, lam_d1, r, eps)
        bound2 = bd.components.get("bound2")
        table.add(m, eps, report.largest, report.sin_largest,
                  bd.components["bound1"], bound2, bd.value, weak_lb)
    return table


PRESETS = {
    "fig1": run_effect_of_radius,
    "fig2": run_high_dim,
    "fig3": run_breakdown_bounds,
    "fig4": run_perturbation_sweep,
}
