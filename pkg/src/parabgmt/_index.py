"""Anisotropic bucket grid for ball queries on point clouds.

A parabolic ball of radius r has x-extent r and t-extent r^2, so the
grid uses cells of size r along spatial axes and r^2 along time; a
query then only has to look at a small block of neighboring cells.
With metric='euclidean' all axes use cell size r.
"""

import numpy as np


class GridIndex:
    def __init__(self, pts, r, metric="parabolic"):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if r <= 0:
            raise ValueError("cell scale r must be > 0")
        if metric not in ("parabolic", "euclidean"):
            raise ValueError(f"unknown metric {metric!r}")
        self.pts = pts
        self.r = float(r)
        self.metric = metric
        d = pts.shape[1]
        cell = np.full(d, self.r)
        if metric == "parabolic":
            cell[-1] = self.r * self.r
        self.cell = cell
        ci = np.floor(pts / cell).astype(np.int64)
        self.origin = ci.min(axis=0)
        ci -= self.origin
        self.dims = ci.max(axis=0) + 1
        self._codes = np.ravel_multi_index(ci.T, self.dims)
        self.order = np.argsort(self._codes, kind="stable")
        self._sorted = self._codes[self.order]

    def _cell_indices(self, code):
        lo = np.searchsorted(self._sorted, code, side="left")
        hi = np.searchsorted(self._sorted, code, side="right")
        return self.order[lo:hi]

    def query(self, center, radius=None):
        """Indices of points within `radius` of center (default: the
        build scale r), in ascending index order."""
        center = np.asarray(center, dtype=float).ravel()
        radius = self.r if radius is None else float(radius)
        reach = np.full(center.size, radius)
        if self.metric == "parabolic":
            reach[-1] = radius * radius
        lo = np.floor((center - reach) / self.cell).astype(np.int64) - self.origin
        hi = np.floor((center + reach) / self.cell).astype(np.int64) - self.origin
        lo = np.clip(lo, 0, self.dims - 1)
        hi = np.clip(hi, 0, self.dims - 1)
        ranges = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, center.size)
        codes = np.ravel_multi_index(mesh.T, self.dims)
        parts = [self._cell_indices(c) for c in codes]
        cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
        if cand.size == 0:
            return cand
        cand.sort()
        diff = self.pts[cand] - center
        d2 = np.einsum("ij,ij->i", diff[:, :-1], diff[:, :-1])
        if self.metric == "parabolic":
            d2 = d2 + np.abs(diff[:, -1])
        else:
            d2 = d2 + diff[:, -1] ** 2
        return cand[d2 <= radius * radius]
