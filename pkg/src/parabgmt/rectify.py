"""Tangent-plane analytics on discrete parabolic measures.

Covers the cone-defect functional, per-point tangent detection and
classification, normalized blow-ups with flatness and cross-scale
uniqueness diagnostics, differentiability fitting for sampled graphs,
and the splitting of a fitted graph into cone-certified pieces.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._index import GridIndex
from ._version import __version__
from .geometry import (
    DimensionMismatchError,
    HomPlane,
    ParaPoint,
    blowup_rows,
    complement_plane,
    dist_rows,
    dist_to_plane_rows,
    graph_cone_check,
    para_norm_rows,
    plane_distance,
    sample_planes,
)
from .measure import DiscreteMeasure

PLANE_DEDUP_TOL = 1e-9


class ConstructionError(RuntimeError):
    """A split piece failed its cone certification.

    Carries the witness pair so the caller can see which two points
    broke the bound (usually a sign that the fit tolerance was too
    loose for the requested constant)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _as_point(a, n):
    if isinstance(a, ParaPoint):
        if a.n != n:
            raise DimensionMismatchError(f"point has n={a.n}, measure has n={n}")
        return a
    arr = np.asarray(a, dtype=float).ravel()
    if arr.size != n + 1:
        raise DimensionMismatchError(f"expected {n + 1} coordinates, got {arr.size}")
    return ParaPoint.from_coords(arr)


@dataclass
class TangentConfig:
    """Search configuration for approximate tangent planes.

    The defining limit is replaced by a max over the finite (s, r) grid
    plus a threshold, and the grid is echoed into every report.  When
    r_list is None it is derived from the cloud resolution: three
    geometric scales 8, 4, 2 times the resolution.
    """

    m: int
    s_list: tuple = (0.5, 0.25, 0.1)
    r_list: tuple | None = None
    plane_budget: int = 64
    threshold: float = 0.05
    sample_size: int = 100
    seed: int = 0
    refine_rounds: int = 2
    workers: int = 1

    def resolved_r_list(self, mu):
        if self.r_list is not None:
            return tuple(float(r) for r in self.r_list)
        r0 = mu.resolution()
        if not r0 or r0 <= 0.0:
            raise ValueError("cloud resolution unavailable; pass r_list explicitly")
        return (8.0 * r0, 4.0 * r0, 2.0 * r0)

    def to_dict(self):
        return {
            "m": int(self.m),
            "s_list": [float(s) for s in self.s_list],
            "r_list": None if self.r_list is None else [float(r) for r in self.r_list],
            "plane_budget": int(self.plane_budget),
            "threshold": float(self.threshold),
            "sample_size": int(self.sample_size),
            "seed": int(self.seed),
            "refine_rounds": int(self.refine_rounds),
            "workers": int(self.workers),
        }


def cone_defect(mu, a, V, s, r, m):
    """Normalized mass of B(a, r) outside the cone X(a, V, s).

    Returns r^(-m) times the total weight of atoms within distance r of
    a whose perpendicular part is at least s times their distance from
    a.  The atom at a itself (distance zero) never counts.
    """
    a = _as_point(a, mu.n)
    if not 0.0 < s < 1.0:
        raise ValueError("aperture must lie in (0, 1)")
    if r <= 0.0:
        raise ValueError("radius must be positive")
    d = dist_rows(mu.points, a)
    keep = (d > 0.0) & (d <= r)
    if not np.any(keep):
        return 0.0
    delta = mu.points[keep] - a.coords()
    perp = dist_to_plane_rows(V, delta)
    outside = perp >= s * d[keep]
    return float(np.sum(mu.weights[keep][outside])) / float(r) ** float(m)


def _canonical_planes(n, m):
    out = []
    if 1 <= m <= n:
        out.extend(HomPlane.horizontal_axes(n, c) for c in itertools.combinations(range(n), m))
    if 2 <= m <= n + 1:
        out.extend(HomPlane.vertical_axes(n, c) for c in itertools.combinations(range(n), m - 2))
    return out


def _dedupe_planes(planes, tol=PLANE_DEDUP_TOL):
    kept = []
    for p in planes:
        if not any(plane_distance(p, q) <= tol for q in kept):
            kept.append(p)
    return kept


def _candidate_planes(n, cfg):
    planes = _canonical_planes(n, cfg.m)
    planes.extend(sample_planes(n, cfg.m, cfg.plane_budget, cfg.seed))
    return _dedupe_planes(planes)


def _perturbed_planes(V, sigma, count, rng):
    """Nearby frames of the same family; empty when the family admits a
    single plane (k = 0 or a full horizontal basis)."""
    if V.k == 0 or (not V.includes_t_axis and V.k == V.n):
        return []
    out = []
    for _ in range(count):
        g = rng.standard_normal(V.horiz_basis.shape)
        q, rr = np.linalg.qr((V.horiz_basis + sigma * g).T)
        diag = np.diag(rr)
        if np.min(np.abs(diag)) < 1e-12:
            continue
        q = q * np.where(diag >= 0.0, 1.0, -1.0)
        out.append(HomPlane(V.n, q.T.copy(), V.includes_t_axis))
    return out


def _gather_ball(mu, a, r_max, index=None):
    """Atoms of mu within r_max of a, minus a itself, sorted by distance.

    Returns (delta, dist, weight) with rows ordered by increasing
    distance; ties keep canonical atom order, so the result does not
    depend on whether a spatial index was used.
    """
    ac = a.coords()
    if index is not None:
        cand = index.query(ac, r_max)
        pts = mu.points[cand]
        w = mu.weights[cand]
    else:
        pts = mu.points
        w = mu.weights
    delta = pts - ac
    d = para_norm_rows(delta)
    keep = (d > 0.0) & (d <= r_max)
    delta, d, w = delta[keep], d[keep], w[keep]
    order = np.argsort(d, kind="stable")
    return delta[order], d[order], w[order]


def _plane_defect_grid(V, delta, d, w, s_list, r_list, m, prefix):
    """Defect at every (r, s) pair for one plane; returns the grid max
    and the flat curve [(r, s, defect), ...]."""
    perp = dist_to_plane_rows(V, delta)
    curve = []
    worst = 0.0
    for r, cnt in zip(r_list, prefix):
        if cnt == 0:
            for s in s_list:
                curve.append((r, s, 0.0))
            continue
        scale = float(r) ** (-float(m))
        dp = d[:cnt]
        pp = perp[:cnt]
        ww = w[:cnt]
        for s in s_list:
            defect = float(np.sum(ww[pp >= s * dp])) * scale
            curve.append((r, s, defect))
            if defect > worst:
                worst = defect
    return worst, curve


class PointTangent:
    """Tangent-detection outcome at one point.

    Iterates as the pair (best_plane, defect_curve); best_plane is None
    when no plane beat the threshold, in which case argmin_plane still
    records the minimizer behind the reported curve.
    """

    __slots__ = ("best_plane", "defect_curve", "classification", "min_defect", "argmin_plane")

    def __init__(self, best_plane, defect_curve, classification, min_defect, argmin_plane):
        self.best_plane = best_plane
        self.defect_curve = defect_curve
        self.classification = classification
        self.min_defect = min_defect
        self.argmin_plane = argmin_plane

    def __iter__(self):
        yield self.best_plane
        yield self.defect_curve

    def __repr__(self):
        return f"PointTangent({self.classification}, min_defect={self.min_defect:.4g})"


def detect_tangent(mu, a, cfg, planes=None, index=None):
    """Approximate tangent plane of mu at a.

    Every candidate plane (the axis-aligned ones plus a seeded budget
    from sample_planes, deduplicated) is scored by the max of
    cone_defect over the (s, r) grid; the argmin wins, ties by list
    position.  Two refinement rounds re-score perturbed frames around
    the current best.  A point whose punctured ball is empty at every
    scale yields class "none" with an empty curve.
    """
    a = _as_point(a, mu.n)
    r_list = cfg.resolved_r_list(mu)
    s_list = tuple(float(s) for s in cfg.s_list)
    m = float(cfg.m)
    if planes is None:
        planes = _candidate_planes(mu.n, cfg)
    delta, d, w = _gather_ball(mu, a, max(r_list), index)
    if d.size == 0:
        return PointTangent(None, [], "none", math.inf, None)
    prefix = [int(np.searchsorted(d, r, side="right")) for r in r_list]
    best_worst = math.inf
    best_plane = None
    best_curve = []
    for V in planes:
        worst, curve = _plane_defect_grid(V, delta, d, w, s_list, r_list, m, prefix)
        if worst < best_worst:
            best_worst, best_plane, best_curve = worst, V, curve
    rng = np.random.default_rng(cfg.seed + 104729)
    for rnd in range(int(cfg.refine_rounds)):
        base = best_plane
        sigma = 0.1 * 0.3**rnd
        for W in _perturbed_planes(base, sigma, 8, rng):
            worst, curve = _plane_defect_grid(W, delta, d, w, s_list, r_list, m, prefix)
            if worst < best_worst:
                best_worst, best_plane, best_curve = worst, W, curve
    if best_worst > cfg.threshold:
        return PointTangent(None, best_curve, "none", best_worst, best_plane)
    return PointTangent(best_plane, best_curve, best_plane.family, best_worst, best_plane)


class TangentReport:
    """Per-point tangent classification over a seeded atom subsample."""

    def __init__(self, config, points, results, fractions):
        self.config = config
        self.points = points
        self.results = results
        self.fractions = fractions

    def __len__(self):
        return len(self.results)

    def __repr__(self):
        parts = ", ".join(f"{k}={v:.3f}" for k, v in sorted(self.fractions.items()))
        return f"TangentReport({len(self)} points, {parts})"

    def to_dict(self):
        per_point = []
        for p, res in zip(self.points, self.results):
            per_point.append(
                {
                    "a": [float(v) for v in p.coords()],
                    "class": res.classification,
                    "best_plane": None if res.best_plane is None else res.best_plane.to_dict(),
                    "defect_curve": [
                        [float(r), float(s), float(x)] for r, s, x in res.defect_curve
                    ],
                }
            )
        return {
            "version": __version__,
            "config": dict(self.config),
            "fractions": {k: float(v) for k, v in self.fractions.items()},
            "per_point": per_point,
        }

    def defect_curves_csv(self, path):
        """Flat r,s,defect rows (plus the point index) for plotting."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("point_index,r,s,defect\n")
            for i, res in enumerate(self.results):
                for r, s, x in res.defect_curve:
                    fh.write(f"{i},{float(r)!r},{float(s)!r},{float(x)!r}\n")


def classify_points(mu, cfg):
    """Run detect_tangent on a seeded subsample of atoms and tally the
    horizontal / vertical / none fractions (they sum to 1).

    Per-point work is independent; with cfg.workers > 1 it runs on a
    thread pool whose ordered map keeps results bit-identical to the
    serial pass.
    """
    if mu.natoms == 0:
        raise ValueError("measure has no atoms")
    rng = np.random.default_rng(cfg.seed)
    size = min(int(cfg.sample_size), mu.natoms)
    sel = np.sort(rng.choice(mu.natoms, size=size, replace=False))
    planes = _candidate_planes(mu.n, cfg)
    r_list = cfg.resolved_r_list(mu)
    index = GridIndex(mu.points, max(r_list)) if mu.natoms > 4096 else None
    points = [ParaPoint.from_coords(mu.points[i]) for i in sel]

    def task(p):
        return detect_tangent(mu, p, cfg, planes=planes, index=index)

    workers = max(1, int(cfg.workers))
    if workers == 1:
        results = [task(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(task, points))
    counts = {"horizontal": 0, "vertical": 0, "none": 0}
    for res in results:
        counts[res.classification] += 1
    fractions = {key: counts[key] / size for key in ("horizontal", "vertical", "none")}
    config = dict(cfg.to_dict(), r_list_resolved=[float(r) for r in r_list])
    return TangentReport(config, points, results, fractions)


def blowup_measure(mu, a, r, normalization="mass", m=None):
    """Zoom of mu at a by scale r, restricted to the unit ball.

    Atoms go through p -> delta_{1/r}(p - a); those with norm <= 1 are
    kept and their weights are scaled by c = 1 / mu(B(a, r)) for "mass"
    normalization or c = r^(-m) for "power".
    """
    a = _as_point(a, mu.n)
    r = float(r)
    if r <= 0.0:
        raise ValueError("scale must be positive")
    rows = blowup_rows(a, r, mu.points)
    keep = para_norm_rows(rows) <= 1.0
    if normalization == "mass":
        mass = float(np.sum(mu.weights[keep]))
        if mass <= 0.0:
            raise ValueError(f"B(a, {r}) holds no atoms; mass normalization undefined")
        c = 1.0 / mass
    elif normalization == "power":
        mm = mu.nominal_dim if m is None else float(m)
        if mm is None:
            raise ValueError("power normalization needs m (or a nominal_dim on mu)")
        c = r ** (-float(mm))
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    hint = mu.resolution_hint / r if mu.resolution_hint else None
    return DiscreteMeasure(
        mu.n,
        rows[keep],
        mu.weights[keep] * c,
        nominal_dim=mu.nominal_dim,
        provenance=(mu.provenance + " | " if mu.provenance else "") + f"blowup r={r:g}",
        resolution_hint=hint,
    )


def _cell_grid(V, grid_cells):
    """Centers of the plane-coordinate grid on V within the unit ball.

    Horizontal planes grid the Euclidean ball of R^k; vertical planes
    grid {(xi, t): |xi|^2 + |t| <= 1}.  Returns (dims, valid mask) with
    the mask flattened in C order.
    """
    g = int(grid_cells)
    axes = V.k + (1 if V.includes_t_axis else 0)
    centers = -1.0 + (np.arange(g) + 0.5) * (2.0 / g)
    mesh = np.meshgrid(*([centers] * axes), indexing="ij") if axes else []
    if axes == 0:
        return 0, np.ones(1, dtype=bool)
    stack = np.stack([mg.ravel() for mg in mesh], axis=1)
    if V.includes_t_axis:
        sq = np.sum(stack[:, :-1] ** 2, axis=1) + np.abs(stack[:, -1])
    else:
        sq = np.sum(stack**2, axis=1)
    return axes, sq <= 1.0


def _empty_cell_fraction(V, coords, grid_cells):
    """Fraction of valid plane cells left empty by the projections of
    the given ambient rows."""
    g = int(grid_cells)
    axes, valid = _cell_grid(V, grid_cells)
    total = int(np.sum(valid))
    if total == 0:
        return 1.0
    if coords.shape[0] == 0:
        return 1.0
    cols = []
    if V.k:
        cols.append(coords[:, :-1] @ V.horiz_basis.T)
    if V.includes_t_axis:
        cols.append(coords[:, -1:])
    plane_xy = np.concatenate(cols, axis=1) if cols else np.zeros((coords.shape[0], 0))
    idx = np.clip(np.floor((plane_xy + 1.0) * (g / 2.0)).astype(int), 0, g - 1)
    codes = np.ravel_multi_index(idx.T, (g,) * axes) if axes else np.zeros(len(idx), dtype=int)
    occupied = np.zeros(g**axes, dtype=bool)
    occupied[codes] = True
    hit = int(np.sum(occupied & valid))
    return float(total - hit) / float(total)


def flatness_defect(nu, m, plane_budget=32, tube_width=0.05, grid_cells=6, seed=0):
    """How far nu (supported in the unit ball) is from a flat measure.

    For each candidate m-plane the score adds the mass fraction outside
    the tube of the given width and the fraction of empty grid cells on
    the plane (so a measure covering only half a plane still scores
    high).  Returns (best_plane, defect) with defect clamped to [0, 1].
    """
    if nu.natoms == 0:
        raise ValueError("flatness defect of an empty measure")
    planes = _dedupe_planes(_canonical_planes(nu.n, m) + sample_planes(nu.n, m, plane_budget, seed))
    total = nu.total_mass
    best = None
    for V in planes:
        dist = dist_to_plane_rows(V, nu.points)
        in_tube = dist <= tube_width
        out_frac = 1.0 - float(np.sum(nu.weights[in_tube])) / total
        empty_frac = _empty_cell_fraction(V, nu.points[in_tube], grid_cells)
        defect = min(1.0, out_frac + empty_frac)
        if best is None or defect < best[1]:
            best = (V, defect)
    return best


class UniquenessScan:
    """Cross-scale flatness scan at one point: best plane and defect per
    scale, the max pairwise plane distance (spread), and the max defect."""

    def __init__(self, point, scales, planes, defects, spread, max_defect):
        self.point = point
        self.scales = scales
        self.planes = planes
        self.defects = defects
        self.spread = spread
        self.max_defect = max_defect

    def __repr__(self):
        return f"UniquenessScan(spread={self.spread:.4g}, max_defect={self.max_defect:.4g})"

    def to_dict(self):
        return {
            "version": __version__,
            "a": [float(v) for v in self.point.coords()],
            "scales": [float(r) for r in self.scales],
            "planes": [V.to_dict() for V in self.planes],
            "defects": [float(x) for x in self.defects],
            "spread": float(self.spread),
            "max_defect": float(self.max_defect),
        }


def tangent_uniqueness_scan(
    mu,
    a,
    scale_sequence,
    m,
    plane_budget=32,
    tube_width=0.05,
    grid_cells=6,
    normalization="mass",
    seed=0,
):
    """Blow up at a over each scale, fit the flattest plane, and report
    how much the winning plane moves across scales.  A small spread and
    small defects is the empirical signature of a unique flat tangent.
    """
    a = _as_point(a, mu.n)
    scales = tuple(float(r) for r in scale_sequence)
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    planes = []
    defects = []
    for r in scales:
        nu = blowup_measure(mu, a, r, normalization=normalization, m=m)
        V, defect = flatness_defect(
            nu, m, plane_budget=plane_budget, tube_width=tube_width, grid_cells=grid_cells, seed=seed
        )
        planes.append(V)
        defects.append(defect)
    spread = 0.0
    for i in range(len(planes) - 1):
        for j in range(i + 1, len(planes)):
            spread = max(spread, plane_distance(planes[i], planes[j]))
    return UniquenessScan(a, scales, planes, defects, spread, max(defects))


@dataclass
class FitConfig:
    """Scales (coarse to fine) and the verdict threshold for
    differentiability fitting."""

    scales: tuple
    threshold: float = 0.05

    def to_dict(self):
        return {"scales": [float(r) for r in self.scales], "threshold": float(self.threshold)}


class DifferentialFit:
    """Weighted least-squares differential of a sampled graph at one
    base point.

    lam maps the horizontal coordinates of the base plane to the
    horizontal coordinates of the complement; homogeneity leaves no
    t-row, so any t-mismatch goes straight into the residual.
    residual_curve lists (scale, max normalized residual) from coarse
    to fine.
    """

    def __init__(self, point_index, base, lam, residual_curve, verdict, flagged):
        self.point_index = point_index
        self.base = base
        self.lam = lam
        self.residual_curve = residual_curve
        self.verdict = verdict
        self.flagged = flagged

    def __repr__(self):
        return f"DifferentialFit(p={self.point_index}, verdict={self.verdict!r})"

    def to_dict(self):
        return {
            "point_index": int(self.point_index),
            "base": [float(v) for v in self.base],
            "lam": [[float(v) for v in row] for row in self.lam],
            "residual_curve": [[float(r), float(x)] for r, x in self.residual_curve],
            "verdict": self.verdict,
            "flagged": bool(self.flagged),
        }


def fit_differential(graph, p_index, cfg):
    """Fit the parabolic differential of a sampled graph at one point.

    Per scale r, the points with base distance in (0, r] enter a least
    squares problem for lam weighted by 1 / distance^2; the residual is
    the max of |value mismatch| / base distance, where the mismatch is
    measured in the parabolic norm of the complement (any t-component
    of the values is unmatchable by lam and counts fully).  The verdict
    is "differentiable" when the finest residual is at or below the
    threshold, "not_differentiable" otherwise; neighborhoods with fewer
    than max(k, 1) points or a rank-deficient regressor flag the fit
    and leave no verdict.
    """
    V = graph.plane
    k = V.k
    p = int(p_index)
    if not 0 <= p < len(graph):
        raise IndexError(f"point index {p} out of range")
    xi = graph.base_h
    eta = graph.value_h
    co_k = eta.shape[1]
    dxi = xi - xi[p]
    deta = eta - eta[p]
    sq = np.einsum("ij,ij->i", dxi, dxi)
    if V.includes_t_axis:
        dbase = np.sqrt(sq + np.abs(graph.base_t - graph.base_t[p]))
        dtau = None
    else:
        dbase = np.sqrt(sq)
        dtau = graph.value_t - graph.value_t[p]
    scales = tuple(sorted((float(r) for r in cfg.scales), reverse=True))
    if not scales:
        raise ValueError("cfg.scales must be nonempty")
    lam = np.zeros((co_k, k))
    curve = []
    flagged = False
    for r in scales:
        sel = (dbase > 0.0) & (dbase <= r)
        cnt = int(np.sum(sel))
        if cnt < max(k, 1):
            flagged = True
            break
        if k and co_k:
            A = dxi[sel] / dbase[sel, None]
            B = deta[sel] / dbase[sel, None]
            sol, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
            if rank < k:
                flagged = True
                break
            lam = sol.T
        mis = deta[sel] - dxi[sel] @ lam.T
        num2 = np.einsum("ij,ij->i", mis, mis)
        if dtau is not None:
            num2 = num2 + np.abs(dtau[sel])
        curve.append((r, float(np.max(np.sqrt(num2) / dbase[sel]))))
    if flagged:
        verdict = None
    elif curve[-1][1] <= cfg.threshold:
        verdict = "differentiable"
    else:
        verdict = "not_differentiable"
    return DifferentialFit(p, graph.base[p].copy(), lam, curve, verdict, flagged)


def _tilted_plane(V, lam):
    """The homogeneous plane spanned by the graph of lam over V: each
    horizontal basis vector is tilted by its lam image in the
    complement, then the frame is re-orthonormalized."""
    if V.k == 0 or lam.shape[0] == 0:
        return V
    co = complement_plane(V)
    rows = V.horiz_basis + lam.T @ co.horiz_basis
    q, rr = np.linalg.qr(rows.T)
    diag = np.diag(rr)
    q = q * np.where(diag >= 0.0, 1.0, -1.0)
    return HomPlane(V.n, q.T.copy(), V.includes_t_axis)


@dataclass
class SplitPiece:
    indices: np.ndarray
    plane: HomPlane
    lam: np.ndarray
    scale_class: int
    cell: tuple


def _validity_radius(fit, eps):
    """Largest scale r such that every residual at scales <= r stays
    within eps; 0 when even the finest scale fails."""
    ok = 0.0
    for r, resid in sorted(fit.residual_curve):
        if resid <= eps:
            ok = r
        else:
            break
    return ok


def split_lipschitz(graph, fits, L):
    """Split a fitted graph into pieces that each satisfy the cone
    condition over a tilted plane.

    Points are grouped by three indices: the dyadic class of the scale
    down to which their residuals stay within L/4, a base cell small
    enough for that class, and the nearest matrix in a greedy L/2 net
    over the fitted differentials.  Each group is certified by
    graph_cone_check over the graph plane of its net matrix at the
    aperture implied by L; failures raise ConstructionError with the
    witness pair.  Points with no valid scale become singleton pieces.
    """
    L = float(L)
    if not 0.0 < L < 1.0:
        raise ValueError("L must lie in (0, 1)")
    fits = list(fits)
    if len(fits) != len(graph):
        raise ValueError("need one differential fit per graph row")
    for f in fits:
        if f.flagged:
            raise ValueError(f"point {f.point_index} carries no successful differential fit")
    eps = L / 4.0
    lp = L / math.sqrt(1.0 - L * L)
    s_cert = lp / math.sqrt(1.0 + lp * lp)
    V = graph.plane
    k = V.k
    xi = graph.base_h
    bt = graph.base_t
    net = []
    groups = {}
    singles = []
    for p in range(len(graph)):
        rp = _validity_radius(fits[p], eps)
        if rp <= 0.0:
            singles.append(p)
            continue
        cls = max(0, int(math.floor(-math.log2(rp))))
        h = 2.0 ** (-cls - 2) / math.sqrt(max(k, 1))
        cell = tuple(int(v) for v in np.floor(xi[p] / h)) if k else ()
        if V.includes_t_axis:
            ht = (2.0 ** (-cls - 2)) ** 2
            cell = cell + (int(math.floor(bt[p] / ht)),)
        lam_p = fits[p].lam
        net_j = None
        for j, center in enumerate(net):
            if np.linalg.norm(lam_p - center) < L / 2.0:
                net_j = j
                break
        if net_j is None:
            net.append(lam_p.copy())
            net_j = len(net) - 1
        groups.setdefault((cls, cell, net_j), []).append(p)
    pts = graph.reassemble()
    pieces = []
    for key in sorted(groups):
        cls, cell, net_j = key
        idx = np.asarray(groups[key], dtype=int)
        W = _tilted_plane(V, net[net_j])
        bad = graph_cone_check(pts[idx], W, s_cert)
        if bad:
            i, j = bad[0]
            gi, gj = int(idx[i]), int(idx[j])
            raise ConstructionError(
                f"piece {key} fails the cone check at points {gi} and {gj}; "
                "the fit tolerance is too loose for this constant",
                witness=(gi, gj),
            )
        pieces.append(SplitPiece(idx, W, net[net_j].copy(), cls, cell))
    for p in singles:
        pieces.append(
            SplitPiece(np.asarray([p], dtype=int), _tilted_plane(V, fits[p].lam), fits[p].lam.copy(), -1, ())
        )
    return pieces
