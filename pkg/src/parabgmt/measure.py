"""Discrete measures and covering-based estimators.

A DiscreteMeasure is a weighted point cloud standing in for a Hausdorff
measure restricted to a set.  On top of it sit a deterministic greedy
ball covering, box-counting dimension fits in the parabolic or
euclidean metric, density profiles, a packing-based estimator for the
flat-measure constants, and the covering-sum evaluator for images of
Lipschitz maps into P^n.
"""

import csv
import math

import numpy as np

from ._index import GridIndex
from ._version import __version__
from .geometry import ParaPoint, as_coord_array, dist_rows

# finest default scale sits at 4x the cloud resolution, per-octave schedule
SCALE_RATIO = 0.5
SCALE_COUNT = 8
SCALE_ANCHOR = 4.0


def canonical_order(coords):
    """Permutation sorting rows lexicographically by x1, x2, ..., t."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    keys = tuple(coords[:, j] for j in range(coords.shape[1] - 1, -1, -1))
    return np.lexsort(keys)


def canonical_sorted(coords):
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    return coords[canonical_order(coords)]


class DiscreteMeasure:
    """Weighted atoms in P^n, canonically sorted, duplicates merged.

    points is an (N, n+1) array whose columns are x1..xn, t; weights is
    the matching (N,) array of positive masses.
    """

    def __init__(self, n, points, weights, nominal_dim=None, provenance="", resolution_hint=None):
        n = int(n)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != n + 1:
            raise ValueError(f"points must have {n + 1} columns for n={n}")
        w = np.asarray(weights, dtype=float)
        if w.shape != (pts.shape[0],):
            raise ValueError("weights must match the number of points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be finite and > 0")
        order = canonical_order(pts)
        pts = pts[order]
        w = w[order]
        if pts.shape[0] > 1:
            new_group = np.empty(pts.shape[0], dtype=bool)
            new_group[0] = True
            new_group[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            starts = np.flatnonzero(new_group)
            if starts.size < pts.shape[0]:
                pts = pts[starts]
                w = np.add.reduceat(w, starts)
        self.n = n
        self.points = pts
        self.weights = w
        self.nominal_dim = None if nominal_dim is None else float(nominal_dim)
        self.provenance = str(provenance)
        self.resolution_hint = None if resolution_hint is None else float(resolution_hint)
        self._resolution = None

    @property
    def natoms(self):
        return self.points.shape[0]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    def atoms(self):
        """Iterate (ParaPoint, weight) pairs in canonical order."""
        for row, w in zip(self.points, self.weights):
            yield ParaPoint(row[:-1], row[-1]), float(w)

    def __len__(self):
        return self.natoms

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return (
            f"DiscreteMeasure(n={self.n}, atoms={self.natoms}, mass={self.total_mass:.6g}, "
            f"provenance={self.provenance!r})"
        )

    def mass_in_ball(self, a, r, metric="parabolic"):
        d = dist_rows(self.points, a, metric)
        return float(np.sum(self.weights[d <= r]))

    def restrict_ball(self, a, r, metric="parabolic"):
        keep = dist_rows(self.points, a, metric) <= r
        if not np.any(keep):
            raise ValueError("no atoms inside the requested ball")
        return DiscreteMeasure(
            self.n,
            self.points[keep],
            self.weights[keep],
            nominal_dim=self.nominal_dim,
            provenance=self.provenance + " | restricted",
            resolution_hint=self.resolution_hint,
        )

    def resolution(self):
        """Parabolic resolution scale of the cloud: the generator hint
        when present, else a measured median nearest-neighbor distance."""
        if self.resolution_hint is not None:
            return self.resolution_hint
        if self._resolution is None:
            if self.natoms < 2:
                self._resolution = 0.0
            else:
                take = np.unique(
                    np.round(np.linspace(0, self.natoms - 1, min(self.natoms, 256))).astype(int)
                )
                mins = []
                for i in take:
                    d = dist_rows(self.points, self.points[i])
                    d[i] = np.inf
                    mins.append(float(d.min()))
                self._resolution = float(np.median(mins))
        return self._resolution

    def to_csv(self, path):
        save_cloud_csv(self, path)

    @classmethod
    def from_csv(cls, path, nominal_dim=None, provenance=None):
        return load_cloud_csv(path, nominal_dim=nominal_dim, provenance=provenance)


def save_cloud_csv(mu, path):
    """Point-cloud CSV: header x1,...,xn,t,w, shortest round-trip floats."""
    header = [f"x{i + 1}" for i in range(mu.n)] + ["t", "w"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row, w in zip(mu.points, mu.weights):
            fields = [repr(float(v)) for v in row] + [repr(float(w))]
            fh.write(",".join(fields) + "\n")


def load_cloud_csv(path, nominal_dim=None, provenance=None):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        expected_tail = ["t", "w"]
        if len(header) < 3 or header[-2:] != expected_tail:
            raise ValueError(f"{path}: header must end with t,w")
        n = len(header) - 2
        if header[:n] != [f"x{i + 1}" for i in range(n)]:
            raise ValueError(f"{path}: header must be x1,...,xn,t,w")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != n + 2:
                raise ValueError(f"{path}:{lineno}: expected {n + 2} fields, got {len(rec)}")
            try:
                rows.append([float(v) for v in rec])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return DiscreteMeasure(
        n,
        arr[:, :-1],
        arr[:, -1],
        nominal_dim=nominal_dim,
        provenance=provenance if provenance is not None else f"csv:{path}",
    )


def _points_of(points):
    if isinstance(points, DiscreteMeasure):
        return points.points
    return as_coord_array(points)


def default_scales(resolution, count=SCALE_COUNT, ratio=SCALE_RATIO, anchor=SCALE_ANCHOR):
    """Decreasing geometric scale schedule anchored at anchor*resolution."""
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    finest = anchor * resolution
    return [finest * (1.0 / ratio) ** i for i in range(count - 1, -1, -1)]


CAND_CAP = 32
EVAL_CAP = 512


def _stride_pick(arr, cap):
    if arr.size <= cap:
        return arr
    sel = np.unique(np.round(np.linspace(0, arr.size - 1, cap)).astype(int))
    return arr[sel]


def greedy_cover(points, r, metric="parabolic"):
    """Deterministic greedy ball cover; returns the (K, n+1) array of
    chosen centers, which are always input points.

    Scans atoms in canonical order; for the first uncovered point it
    picks, among the uncovered candidates within r of it, the one whose
    ball covers the most still-uncovered points (evaluated on a bounded
    deterministic sample), then marks that ball covered.  Centers stay
    mutually more than r apart because candidates are never covered.
    """
    if r <= 0:
        raise ValueError("radius must be > 0")
    pts = canonical_sorted(_points_of(points))
    npts = pts.shape[0]
    if npts == 0:
        return pts.copy()
    index = GridIndex(pts, r, metric)
    covered = np.zeros(npts, dtype=bool)
    centers = []
    scan = 0
    while True:
        while scan < npts and covered[scan]:
            scan += 1
        if scan == npts:
            break
        p = pts[scan]
        cand = index.query(p, r)
        cand = cand[~covered[cand]]
        cand = _stride_pick(cand, CAND_CAP)
        if scan not in cand:
            cand = np.sort(np.append(cand, scan))
        if cand.size == 1:
            best = int(cand[0])
        else:
            ev = index.query(p, 2.0 * r)
            ev = ev[~covered[ev]]
            ev = _stride_pick(ev, EVAL_CAP)
            diff_x = pts[cand, None, :-1] - pts[None, ev, :-1]
            d2 = np.einsum("ijk,ijk->ij", diff_x, diff_x)
            dt = pts[cand, None, -1] - pts[None, ev, -1]
            if metric == "parabolic":
                d2 = d2 + np.abs(dt)
            else:
                d2 = d2 + dt * dt
            gains = np.sum(d2 <= r * r, axis=1)
            best = int(cand[int(np.argmax(gains))])
        centers.append(best)
        covered[index.query(pts[best], r)] = True
    return pts[np.asarray(centers, dtype=int)]


class CoveringReport:
    def __init__(self, metric, scales, counts, sums, fitted_dim, fit_residual):
        self.metric = metric
        self.scales = [float(r) for r in scales]
        self.counts = [int(c) for c in counts]
        self.sums = {str(k): [float(v) for v in vals] for k, vals in (sums or {}).items()}
        self.fitted_dim = float(fitted_dim)
        self.fit_residual = float(fit_residual)

    def to_dict(self, seed=None):
        return {
            "metric": self.metric,
            "scales": self.scales,
            "counts": self.counts,
            "sums": self.sums,
            "fitted_dim": self.fitted_dim,
            "fit_residual": self.fit_residual,
            "version": __version__,
            "seed": seed,
        }


def dimension_fit(points, scales, metric="parabolic", sum_exponents=()):
    """Box-counting dimension: least squares slope of log N(r) against
    log(1/r) over the greedy covering counts."""
    pts = _points_of(points)
    n = pts.shape[1] - 1
    scales = sorted((float(r) for r in scales), reverse=True)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    counts = [greedy_cover(pts, r, metric).shape[0] for r in scales]
    sums = {s: [c * (2.0 * r) ** s for c, r in zip(counts, scales)] for s in sum_exponents}
    logs = np.log(np.asarray(counts, dtype=float))
    if np.all(np.asarray(counts) == counts[0]):
        return CoveringReport(metric, scales, counts, sums, 0.0, math.inf)
    design = np.stack([np.log(1.0 / np.asarray(scales)), np.ones(len(scales))], axis=1)
    coef, _, _, _ = np.linalg.lstsq(design, logs, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - logs) ** 2)))
    upper = n + 2 if metric == "parabolic" else n + 1
    fitted = float(np.clip(coef[0], 0.0, upper))
    return CoveringReport(metric, scales, counts, sums, fitted, resid)


def hausdorff_sum(points, s, scales, metric="parabolic"):
    """Premeasure surrogate per scale: N(r) * (2r)^s with N from the
    greedy cover (ball diameters taken as 2r)."""
    pts = _points_of(points)
    out = []
    for r in sorted((float(r) for r in scales), reverse=True):
        count = greedy_cover(pts, r, metric).shape[0]
        out.append(count * (2.0 * r) ** s)
    return out


class DensityEstimate:
    def __init__(self, point, s, scales, values, upper, lower):
        self.point = point
        self.s = float(s)
        self.scales = [float(r) for r in scales]
        self.values = [float(v) for v in values]
        self.upper = float(upper)
        self.lower = float(lower)

    def to_dict(self, seed=None):
        return {
            "point": [float(v) for v in self.point.coords()],
            "s": self.s,
            "scales": self.scales,
            "values": self.values,
            "upper": self.upper,
            "lower": self.lower,
            "version": __version__,
            "seed": seed,
        }


def density_profile(mu, a, s, scales):
    """Values (2r)^{-s} mu(B(a,r)) per scale; upper/lower are the
    max/min over the finest third of the scales."""
    scales = sorted((float(r) for r in scales), reverse=True)
    d = dist_rows(mu.points, a)
    values = []
    for r in scales:
        mass = float(np.sum(mu.weights[d <= r]))
        values.append((2.0 * r) ** (-s) * mass)
    k = max(1, len(scales) // 3)
    fine = values[-k:]
    return DensityEstimate(
        a if isinstance(a, ParaPoint) else ParaPoint(np.asarray(a)[:-1], np.asarray(a)[-1]),
        s,
        scales,
        values,
        max(fine),
        min(fine),
    )


class FlatConstantEstimate:
    def __init__(self, family, m, value, raw, lower, upper, scales, scale_values):
        self.family = family
        self.m = int(m)
        self.value = float(value)
        self.raw = float(raw)
        self.lower = float(lower)
        self.upper = float(upper)
        self.scales = [float(r) for r in scales]
        self.scale_values = [float(v) for v in scale_values]

    def to_dict(self, seed=None):
        return {
            "family": self.family,
            "m": self.m,
            "value": self.value,
            "raw": self.raw,
            "lower": self.lower,
            "upper": self.upper,
            "scales": self.scales,
            "scale_values": self.scale_values,
            "version": __version__,
            "seed": seed,
        }


def _flat_plane_cloud(n, m, family):
    """Dense cloud on the canonical plane of P(n,m) inside B(0,1),
    together with the per-axis grid steps used to build it."""
    if family == "horizontal":
        if not 1 <= m <= n:
            raise ValueError(f"horizontal family needs 1 <= m <= n, got m={m}, n={n}")
        h = {1: 1e-3, 2: 4e-3}.get(m, 2e-2)
        axes = [np.arange(-1.0, 1.0 + h / 2, h) for _ in range(m)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
        mesh = mesh[np.einsum("ij,ij->i", mesh, mesh) <= 1.0]
        pts = np.zeros((mesh.shape[0], n + 1))
        pts[:, :m] = mesh
        w = np.full(pts.shape[0], h**m)
        return pts, w, [h] * m + [0.0]
    if family == "vertical":
        if not 2 <= m <= n + 1:
            raise ValueError(f"vertical family needs 2 <= m <= n+1, got m={m}, n={n}")
        k = m - 2
        if k == 0:
            ht = 2e-5
            t = np.arange(-1.0, 1.0 + ht / 2, ht)
            pts = np.zeros((t.size, n + 1))
            pts[:, -1] = t
            w = np.full(t.size, ht)
            return pts, w, [0.0] * n + [ht]
        hx = 8e-3 if k == 1 else 4e-2
        ht = 2e-3 if k == 1 else 1e-2
        axes = [np.arange(-1.0, 1.0 + hx / 2, hx) for _ in range(k)]
        axes.append(np.arange(-1.0, 1.0 + ht / 2, ht))
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k + 1)
        keep = np.einsum("ij,ij->i", mesh[:, :k], mesh[:, :k]) + np.abs(mesh[:, k]) <= 1.0
        mesh = mesh[keep]
        pts = np.zeros((mesh.shape[0], n + 1))
        pts[:, :k] = mesh[:, :k]
        pts[:, -1] = mesh[:, k]
        w = np.full(pts.shape[0], hx**k * ht)
        return pts, w, [hx] * k + [0.0] * (n - k) + [ht]
    raise ValueError(f"unknown family {family!r}")


def _packing_value(pts, w, r, m, inflate):
    """One scale of the flat-constant estimator: greedy disjoint ball
    packing, interior balls only, piece diameters measured empirically
    with per-axis cell inflation and capped at the ball diameter 2r,
    then normalized by the covered mass fraction."""
    index = GridIndex(pts, 2.0 * r)
    npts = pts.shape[0]
    norm2 = np.einsum("ij,ij->i", pts[:, :-1], pts[:, :-1]) + np.abs(pts[:, -1])
    hx = np.asarray(inflate[:-1], dtype=float)
    ht = float(inflate[-1])
    blocked = np.zeros(npts, dtype=bool)
    centers = []
    for i in range(npts):
        if blocked[i]:
            continue
        centers.append(i)
        blocked[index.query(pts[i], 2.0 * r)] = True
    covered = np.zeros(npts, dtype=bool)
    total = 0.0
    for i in centers:
        if norm2[i] > (1.0 - r) ** 2:
            continue
        inside = index.query(pts[i], r)
        piece = pts[inside]
        pick = np.unique(
            np.concatenate(
                [
                    piece.argmin(axis=0),
                    piece.argmax(axis=0),
                    np.round(np.linspace(0, piece.shape[0] - 1, 128)).astype(int),
                ]
            )
        )
        sub = piece[pick]
        dx = np.abs(sub[:, None, :-1] - sub[None, :, :-1]) + hx
        dd = np.einsum("...i,...i->...", dx, dx) + np.abs(sub[:, None, -1] - sub[None, :, -1]) + ht
        diam2 = min(float(dd.max()), (2.0 * r) ** 2)
        total += diam2 ** (m / 2.0)
        covered[inside] = True
    frac = float(np.sum(w[covered])) / float(np.sum(w))
    if frac == 0.0:
        return 0.0
    return total / frac


DEFAULT_FLAT_SCALES = (0.2, 0.15, 0.105, 0.075)


def flat_constant_estimate(n, m, family, scales=None):
    """Estimate the flat-measure constant of the canonical plane of
    P(n,m): the number p(V) with H^m(V cap B(0,r)) = p(V) r^m.

    Per scale the estimator packs disjoint balls, sums their piece
    diameters to the power m, and normalizes by the covered mass
    fraction; the reported value is the linear-in-r intercept over the
    four finest scales, clamped into [1, 2^m].  `raw` keeps the
    unclamped intercept.
    """
    scales = sorted(
        (float(r) for r in (scales if scales is not None else DEFAULT_FLAT_SCALES)), reverse=True
    )
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    pts, w, inflate = _flat_plane_cloud(int(n), int(m), family)
    values = [_packing_value(pts, w, r, m, inflate) for r in scales]
    tail = min(4, len(scales))
    rs = np.asarray(scales[-tail:])
    vs = np.asarray(values[-tail:])
    design = np.stack([rs, np.ones(tail)], axis=1)
    coef, _, _, _ = np.linalg.lstsq(design, vs, rcond=None)
    raw = float(coef[1])
    value = float(np.clip(raw, 1.0, 2.0**m))
    band = [raw] + list(vs)
    return FlatConstantEstimate(
        family, m, value, raw, min(band), max(band), scales, values
    )


class GridMap:
    """Samples of a map from a cube in R^{n+1} into P^n on a uniform
    inclusive grid: values has shape (M, ..., M, n+1) with equal grid
    axes, domain is the (lo, hi) interval shared by every input axis."""

    def __init__(self, values, domain=(0.0, 1.0)):
        values = np.asarray(values, dtype=float)
        if values.ndim < 2:
            raise ValueError("values must have grid axes plus a coordinate axis")
        d = values.ndim - 1
        M = values.shape[0]
        if any(sz != M for sz in values.shape[:d]) or M < 2:
            raise ValueError("all grid axes must have the same length >= 2")
        if values.shape[-1] != d:
            raise ValueError(
                "a map into P^n needs n+1 output coordinates matching the n+1 input axes"
            )
        lo, hi = float(domain[0]), float(domain[1])
        if not hi > lo:
            raise ValueError("domain must be a nondegenerate interval")
        self.values = values
        self.lo = lo
        self.hi = hi

    @property
    def d(self):
        return self.values.ndim - 1

    @property
    def n(self):
        return self.d - 1

    @property
    def M(self):
        return self.values.shape[0]

    @property
    def side(self):
        return self.hi - self.lo

    def axis_points(self):
        return np.linspace(self.lo, self.hi, self.M)

    def domain_points(self):
        axes = [self.axis_points() for _ in range(self.d)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.d)

    def flat_values(self):
        return self.values.reshape(-1, self.d)

    @classmethod
    def from_function(cls, f, n, m_points, domain=(0.0, 1.0)):
        d = n + 1
        lo, hi = float(domain[0]), float(domain[1])
        axes = [np.linspace(lo, hi, m_points) for _ in range(d)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        out = np.asarray([f(u) for u in mesh], dtype=float)
        return cls(out.reshape(tuple([m_points] * d) + (d,)), domain)


class LipCoverSum:
    def __init__(self, value, N, delta, columns, balls, lhat, lhat_fine, lhat_coarse, flagged):
        self.value = float(value)
        self.N = int(N)
        self.delta = float(delta)
        self.columns = int(columns)
        self.balls = int(balls)
        self.lhat = float(lhat)
        self.lhat_fine = float(lhat_fine)
        self.lhat_coarse = float(lhat_coarse)
        self.flagged = bool(flagged)

    def to_dict(self, seed=None):
        return {
            "value": self.value,
            "N": self.N,
            "delta": self.delta,
            "columns": self.columns,
            "balls": self.balls,
            "lhat": self.lhat,
            "lhat_fine": self.lhat_fine,
            "lhat_coarse": self.lhat_coarse,
            "flagged": self.flagged,
            "version": __version__,
            "seed": seed,
        }


def _pairwise_ratio_max(dom, img, min_sep):
    """Max parabolic-image over euclidean-domain distance ratio among
    pairs separated by at least min_sep in the domain."""
    best = 0.0
    npts = dom.shape[0]
    for i in range(npts - 1):
        du = dom[i + 1 :] - dom[i]
        dd = np.sqrt(np.einsum("ij,ij->i", du, du))
        keep = dd >= min_sep
        if not np.any(keep):
            continue
        dv = img[i + 1 :][keep] - img[i]
        dpar = np.sqrt(
            np.einsum("ij,ij->i", dv[:, :-1], dv[:, :-1]) + np.abs(dv[:, -1])
        )
        best = max(best, float(np.max(dpar / dd[keep])))
    return best


def lip_image_cover_sum(gm, N):
    """Covering-sum evaluator at dimension n+1 for the image of a grid
    map into P^n, following the column-counting scheme: with r = R/N
    and ball diameter delta = sqrt(R r), the image is split into
    delta-columns in the horizontal coordinates and each column is
    charged max(1, ceil(t_extent / (delta^2/2))) balls, where t_extent
    is the observed extent capped by the Lipschitz chain bound
    (n+1)^2 Lhat^2 R r.

    A sampled non-Lipschitz map (fine-scale ratios much larger than
    coarse ones) sets the flagged bit; the chain bound uses the global
    diameter ratio Lhat, so the counting still reflects the scheme
    rather than the degenerate empirical extents.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if (gm.M - 1) % N != 0:
        raise ValueError(f"grid with {gm.M} points per axis is not N-refined for N={N}")
    n = gm.n
    R = gm.side
    r = R / N
    delta = math.sqrt(R * r)
    vals = gm.flat_values()
    xs = vals[:, :-1]
    ts = vals[:, -1]
    if np.all(vals == vals[0]):
        return LipCoverSum(0.0, N, delta, 0, 0, 0.0, 0.0, 0.0, False)
    dom = gm.domain_points()
    stride = max(1, int(np.ceil(dom.shape[0] / 1024)))
    dom_s = dom[::stride]
    img_s = vals[::stride]
    lhat_coarse = _pairwise_ratio_max(dom_s, img_s, R / 4.0)
    spacing = R / (gm.M - 1)
    lhat_fine = 0.0
    for axis in range(gm.d):
        a = np.moveaxis(gm.values, axis, 0)
        dv = a[1:] - a[:-1]
        dv = dv.reshape(-1, gm.d)
        dpar = np.sqrt(np.einsum("ij,ij->i", dv[:, :-1], dv[:, :-1]) + np.abs(dv[:, -1]))
        if dpar.size:
            lhat_fine = max(lhat_fine, float(np.max(dpar)) / spacing)
    flagged = lhat_fine > 2.0 * lhat_coarse
    # global diameter ratio: a lower bound for any true Lipschitz constant
    dmax_dom = math.sqrt(gm.d) * R
    far = _pairwise_ratio_max(dom_s, img_s, 0.75 * dmax_dom)
    lhat = far if far > 0 else (lhat_coarse if lhat_coarse > 0 else lhat_fine)
    cols_idx = np.floor(xs / delta).astype(np.int64)
    cols_idx -= cols_idx.min(axis=0)
    dims = cols_idx.max(axis=0) + 1
    codes = np.ravel_multi_index(cols_idx.T, dims)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    sorted_ts = ts[order]
    starts = np.flatnonzero(np.concatenate([[True], sorted_codes[1:] != sorted_codes[:-1]]))
    t_max = np.maximum.reduceat(sorted_ts, starts)
    t_min = np.minimum.reduceat(sorted_ts, starts)
    extent = t_max - t_min
    cap = (n + 1) ** 2 * lhat**2 * R * r
    capped = np.minimum(extent, cap)
    balls = np.maximum(1, np.ceil(capped / (delta * delta / 2.0)).astype(np.int64))
    total = float(np.sum(balls)) * delta ** (n + 1)
    return LipCoverSum(
        total, N, delta, int(starts.size), int(np.sum(balls)), lhat, lhat_fine, lhat_coarse, flagged
    )
