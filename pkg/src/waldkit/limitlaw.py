"""Monte Carlo sampling of the asymptotic Wald law, divergence detection,
and a finite-sample oracle simulator.

When the leading-form analysis classifies a system as CLDR at the tested
point, the limit of the statistic is the law of

    gbar(X)' [ Gbar(X) V Gbar(X)' ]^{-1} gbar(X),      X = V^{1/2} Z,

with ``Z`` the limiting estimator noise.  All symbolic work stays exact;
the covariance enters only through the sampled ``X``.  Under deficient
rank there is no finite law and a :class:`Diverges` marker is returned.

Draws that make the inner matrix numerically singular are redrawn from a
fresh stream lane (and counted); they are never dropped silently, and an
excessive redraw rate aborts the run since it usually means the system was
misclassified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from . import rng
from .cldr import CldrAnalysis, DEFICIENT_RANK
from .errors import DivergentLawError, RedrawLimitError
from .polymatrix import PolyMatrix, jacobian
from .restrictions import RestrictionSystem
from .waldstat import RCOND_FLOOR

MIN_DRAWS = 1000
MAX_REDRAW_RATE = 0.001
_MAX_ROUNDS = 64

Z_NORMAL = "standard-normal"
Z_SPHERICAL = "spherical"
Z_TABLE = "user-table"


@dataclass(frozen=True)
class QuantileTable:
    """Piecewise-linear quantile function given on a probability grid."""

    probs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if probs.ndim != 1 or probs.shape != values.shape or probs.size < 2:
            raise ValueError("need matching 1-d probability and value grids")
        if probs[0] <= 0.0 or probs[-1] >= 1.0 or np.any(np.diff(probs) <= 0):
            raise ValueError("probabilities must increase strictly inside (0, 1)")
        if np.any(np.diff(values) < 0):
            raise ValueError("quantile values must be non-decreasing")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "values", values)

    def sample(self, u: np.ndarray) -> np.ndarray:
        return np.interp(u, self.probs, self.values)


@dataclass(frozen=True)
class LimitLawConfig:
    """Sampler configuration: draw count, master seed, covariance, and the
    law of the limiting noise ``Z``."""

    V: np.ndarray
    draws: int = 200_000
    seed: int = 0
    z_law: str = Z_NORMAL
    z_table: QuantileTable | None = None

    def __post_init__(self):
        if self.draws < MIN_DRAWS:
            raise ValueError(f"need at least {MIN_DRAWS} draws")
        if self.z_law not in (Z_NORMAL, Z_SPHERICAL, Z_TABLE):
            raise ValueError(f"unknown z_law {self.z_law!r}")
        if self.z_law != Z_NORMAL and self.z_table is None:
            raise ValueError(f"z_law {self.z_law!r} requires a quantile table")
        v = np.asarray(self.V, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("V must be a square matrix")
        object.__setattr__(self, "V", v)


@dataclass(frozen=True)
class EmpiricalLaw:
    """Sorted Monte Carlo sample with quantile queries."""

    values: np.ndarray
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty vector")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("law values must be finite and non-negative")
        if np.any(np.diff(values) < 0):
            values = np.sort(values)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def quantile(self, gamma: float) -> float:
        return empirical_quantile(self, gamma)

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.values, x, side="right") / self.n


@dataclass(frozen=True)
class Diverges:
    """Marker: the statistic diverges to infinity under the null."""

    metadata: dict = field(default_factory=dict)


def empirical_quantile(law: EmpiricalLaw, gamma: float) -> float:
    """Order-statistic quantile with type-7 (linear) interpolation."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly inside (0, 1)")
    return float(np.quantile(law.values, gamma))


def sqrtm_spd(matrix: np.ndarray, floor: float = 1e-10) -> np.ndarray:
    """Symmetric square root via eigendecomposition, with an eigenvalue
    floor check relative to the largest eigenvalue."""
    m = np.asarray(matrix, dtype=np.float64)
    eigval, eigvec = np.linalg.eigh(0.5 * (m + m.T))
    if eigval[-1] <= 0.0 or eigval[0] <= floor * eigval[-1]:
        raise ValueError("matrix is not safely positive definite")
    return (eigvec * np.sqrt(eigval)) @ eigvec.T


def draw_noise(cfg: LimitLawConfig, n: int, dim: int, lane: int = 0) -> np.ndarray:
    """``(n, dim)`` draws of the limiting noise ``Z`` under ``cfg.z_law``."""
    if cfg.z_law == Z_NORMAL:
        return rng.normal_matrix(cfg.seed, n, dim, lane)
    if cfg.z_law == Z_TABLE:
        return cfg.z_table.sample(rng.uniform_matrix(cfg.seed, n, dim, lane))
    # Spherical: uniform direction times a radial draw from the table.
    u = rng.uniform_matrix(cfg.seed, n, dim + 1, lane)
    direction = np.asarray(ndtri(u[:, :dim]))
    norms = np.linalg.norm(direction, axis=1)
    norms[norms == 0.0] = 1.0
    direction /= norms[:, None]
    radius = cfg.z_table.sample(u[:, dim])
    return radius[:, None] * direction


def batch_quadratic_form(
    numer: np.ndarray, mats: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """``w_i = numer_i' mats_i^{-1} numer_i`` batched, plus an ok-mask.

    ``mats`` must be symmetric; draws whose matrix is not safely positive
    definite (rcond at or below the shared floor) are masked out.
    """
    eig = np.linalg.eigvalsh(mats)
    top = np.max(np.abs(eig), axis=1)
    ok = (top > 0) & (eig[:, 0] > 0)
    rcond = np.zeros_like(top)
    rcond[ok] = eig[ok, 0] / top[ok]
    ok &= rcond > RCOND_FLOOR
    out = np.full(numer.shape[0], np.nan)
    if np.any(ok):
        solved = np.linalg.solve(mats[ok], numer[ok, :, None])[:, :, 0]
        out[ok] = np.einsum("ij,ij->i", numer[ok], solved)
    return out, ok


def _limit_draw_values(
    gbar: Sequence, gbar_matrix: PolyMatrix, v: np.ndarray, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    gvals = np.column_stack([poly.evaluate_batch(x) for poly in gbar])
    gmats = gbar_matrix.evaluate_batch(x)
    inner = np.einsum("nij,jk,nlk->nil", gmats, v, gmats)
    inner = 0.5 * (inner + np.swapaxes(inner, 1, 2))
    return batch_quadratic_form(gvals, inner)


def _run_with_redraws(
    cfg: LimitLawConfig, dim: int, values_of, budget: int | None = None
) -> tuple:
    """Fill ``cfg.draws`` values, redrawing masked draws from fresh lanes.

    ``values_of(z)`` maps an ``(m, dim)`` noise block to ``(values, ok)``.
    Returns ``(values, z, redraws)`` with per-draw pairing preserved.
    """
    n = cfg.draws
    z = draw_noise(cfg, n, dim, lane=0)
    values, ok = values_of(z)
    pending = np.flatnonzero(~ok)
    redraws = 0
    if budget is None:
        budget = max(1, int(math.ceil(MAX_REDRAW_RATE * n)))
    for round_no in range(1, _MAX_ROUNDS + 1):
        if pending.size == 0:
            break
        redraws += int(pending.size)
        if redraws > budget:
            raise RedrawLimitError(
                f"{redraws} of {n} draws hit a singular quadratic form "
                "(deficient-rank misclassification is the usual cause)"
            )
        fresh = draw_noise(cfg, int(pending.size), dim, lane=round_no)
        new_values, new_ok = values_of(fresh)
        z[pending] = fresh
        values[pending] = new_values
        pending = pending[~new_ok]
    else:
        raise RedrawLimitError("redraw rounds exhausted")
    return values, z, redraws


def simulate_limit_draws(
    system: RestrictionSystem, analysis: CldrAnalysis, cfg: LimitLawConfig
) -> tuple[np.ndarray, np.ndarray, int]:
    """Unsorted per-draw limit values paired with their noise draws.

    Internal building block for :func:`sample_limit_law`; exposed because
    pathwise bound checks need the (value, Z) pairing before sorting.
    """
    _require_centered(system)
    if analysis.gbar is None:
        raise ValueError("analysis lacks gbar; use analyze_at")
    if analysis.classification == DEFICIENT_RANK:
        raise DivergentLawError("no finite limit law under deficient rank")
    if cfg.V.shape != (system.p, system.p):
        raise ValueError("V has wrong shape for the system")
    root = sqrtm_spd(cfg.V)

    def values_of(z):
        return _limit_draw_values(analysis.gbar, analysis.Gbar, cfg.V, z @ root)

    return _run_with_redraws(cfg, system.p, values_of)


def sample_forms_law(
    gbar: Sequence,
    gbar_matrix: PolyMatrix,
    cfg: LimitLawConfig,
    metadata: dict | None = None,
) -> EmpiricalLaw:
    """Sample the quadratic-form law of given leading forms directly."""
    if cfg.V.shape != (gbar_matrix.cols, gbar_matrix.cols):
        raise ValueError("V has wrong shape for the leading forms")
    root = sqrtm_spd(cfg.V)

    def values_of(z):
        return _limit_draw_values(gbar, gbar_matrix, cfg.V, z @ root)

    values, _, redraws = _run_with_redraws(cfg, gbar_matrix.cols, values_of)
    meta = dict(metadata or {})
    meta.update({"z_law": cfg.z_law, "draws": cfg.draws, "redraws": redraws})
    return EmpiricalLaw(values=np.sort(values), seed=cfg.seed, metadata=meta)


def sample_limit_law(
    system: RestrictionSystem, analysis: CldrAnalysis, cfg: LimitLawConfig
):
    """Sample the asymptotic law of the statistic, or detect divergence.

    The system must already be centered at the tested point (``g(0) = 0``)
    with ``analysis`` computed from its Jacobian.  Returns an
    :class:`EmpiricalLaw`, or :class:`Diverges` under deficient rank.
    """
    base_meta = {
        "system_hash": system.content_hash(),
        "theta_bar": [str(x) for x in (system.theta_bar or [])],
        "alpha": list(analysis.alpha),
        "alpha_bar": analysis.alpha_bar,
        "sum_alpha": sum(analysis.alpha),
        "classification": analysis.classification,
    }
    if analysis.classification == DEFICIENT_RANK:
        return Diverges(metadata=base_meta)
    _require_centered(system)
    if analysis.gbar is None:
        raise ValueError("analysis lacks gbar; use analyze_at")
    return sample_forms_law(analysis.gbar, analysis.Gbar, cfg, base_meta)


def finite_T_reference(
    system: RestrictionSystem,
    theta_bar: Sequence,
    V: np.ndarray,
    T: float,
    draws: int,
    seed: int,
) -> EmpiricalLaw:
    """Monte Carlo of the exact finite-sample statistic at sample size ``T``.

    Simulates ``theta_hat = theta_bar + V^{1/2} Z / sqrt(T)`` with Gaussian
    noise and evaluates the statistic with ``V_hat = V``; the convergence
    oracle for :func:`sample_limit_law`.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    v = np.asarray(V, dtype=np.float64)
    center = np.array([float(x) for x in theta_bar])
    if center.shape != (system.p,):
        raise ValueError("theta_bar has wrong dimension")
    root = sqrtm_spd(v)
    scale = 1.0 / math.sqrt(T)
    gpolys = system.g
    gmatrix = jacobian(system)
    cfg = LimitLawConfig(V=v, draws=draws, seed=seed)

    def values_of(z):
        theta = center[None, :] + scale * (z @ root)
        gvals = np.column_stack([poly.evaluate_batch(theta) for poly in gpolys])
        gmats = gmatrix.evaluate_batch(theta)
        inner = np.einsum("nij,jk,nlk->nil", gmats, v, gmats)
        inner = 0.5 * (inner + np.swapaxes(inner, 1, 2))
        values, ok = batch_quadratic_form(gvals, inner)
        return T * values, ok

    # Landing on the singular set is a real event at finite T (the statistic
    # is simply undefined there), so the redraw budget is the run itself,
    # not the misclassification tripwire used for limit laws.
    values, _, redraws = _run_with_redraws(cfg, system.p, values_of, budget=draws)
    meta = {
        "system_hash": system.content_hash(),
        "kind": "finite-T",
        "T": float(T),
        "draws": draws,
        "redraws": redraws,
    }
    return EmpiricalLaw(values=np.sort(values), seed=seed, metadata=meta)


def prestandardized_limit_draws(
    system: RestrictionSystem,
    analysis: CldrAnalysis,
    cfg: LimitLawConfig,
) -> np.ndarray:
    """Independent float-mode pipeline that standardizes the variables first.

    Substitutes ``y -> V^{1/2} y`` into the (float-converted) leading forms,
    absorbs the covariance into the polynomials, and samples with
    ``Z ~ N(0, I)``.  The resulting law must agree with the primary
    formulation, which keeps the covariance in the quadratic form instead;
    used as a distributional cross-check.
    """
    _require_centered(system)
    if analysis.classification == DEFICIENT_RANK:
        raise DivergentLawError("no finite limit law under deficient rank")
    root = sqrtm_spd(cfg.V)
    inv_root = np.linalg.inv(root)
    # affine_substitute(A) computes P(A^{-1} y); A = V^{-1/2} gives P(V^{1/2} y).
    gbar0 = [g.to_float().affine_substitute(inv_root) for g in analysis.gbar]
    gbar_matrix0 = (
        analysis.Gbar.to_float().affine_substitute(inv_root).right_mul_constant(root)
    )
    eye = np.eye(system.p)

    def values_of(z):
        return _limit_draw_values(gbar0, gbar_matrix0, eye, z)

    values, _, _ = _run_with_redraws(cfg, system.p, values_of)
    return np.sort(values)


def ks_distance(a, b) -> float:
    """Sup-norm distance between empirical CDFs, or empirical vs analytic.

    ``a`` is an :class:`EmpiricalLaw` or sample vector; ``b`` is the same,
    or a callable CDF.
    """
    xs = np.sort(_as_values(a))
    n = xs.size
    if n == 0:
        raise ValueError("empty sample")
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    if callable(b):
        f = np.asarray(b(xs), dtype=np.float64)
        return float(np.max(np.maximum(hi - f, f - lo)))
    ys = np.sort(_as_values(b))
    if ys.size == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / n
    cdf_y = np.searchsorted(ys, grid, side="right") / ys.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def _as_values(sample) -> np.ndarray:
    if isinstance(sample, EmpiricalLaw):
        return sample.values
    return np.asarray(sample, dtype=np.float64)


def _require_centered(system: RestrictionSystem) -> None:
    origin = (0,) * system.p
    for i, gi in enumerate(system.g):
        if gi.evaluate(origin) != 0:
            raise ValueError(
                f"restriction {i + 1} does not vanish at the origin; "
                "shift the system to the tested point first"
            )


def save_law(law: EmpiricalLaw, prefix: str) -> tuple[str, str]:
    """Write ``<prefix>.bin`` (little-endian binary64 column) and
    ``<prefix>.json`` (seed, size, metadata)."""
    import json

    bin_path, json_path = f"{prefix}.bin", f"{prefix}.json"
    law.values.astype("<f8").tofile(bin_path)
    sidecar = {"seed": law.seed, "n": law.n, "metadata": law.metadata}
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, sort_keys=True, indent=2)
        handle.write("\n")
    return bin_path, json_path


def load_law(prefix: str) -> EmpiricalLaw:
    import json

    values = np.fromfile(f"{prefix}.bin", dtype="<f8")
    with open(f"{prefix}.json", "r", encoding="utf-8") as handle:
        sidecar = json.load(handle)
    return EmpiricalLaw(
        values=values, seed=sidecar["seed"], metadata=sidecar["metadata"]
    )
