"""Exact algebra of the parabolic space P^n = R^n x R.

The norm is ||(x,t)|| = sqrt(|x|^2 + |t|), the dilations are
delta_r(x,t) = (r x, r^2 t), and the homogeneous (dilation invariant)
planes come in two families: horizontal planes inside R^n x {0} and
vertical planes containing the t-axis.  Everything here is pure
function algebra on immutable values; the heavier estimators live in
the measure and rectify modules.
"""

import itertools

import numpy as np
from scipy.linalg import null_space
from scipy.stats import norm as _norm_dist
from scipy.stats import qmc

ORTHO_TOL = 1e-10
CONE_BAND = 1e-9


class DimensionMismatchError(ValueError):
    pass


class ConeViolationError(ValueError):
    """Raised when a point set fails a cone condition it was required to satisfy."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


def _check_finite(arr, name):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")


class ParaPoint:
    """A point (x, t) of P^n with spatial vector x and time t."""

    __slots__ = ("x", "t")

    def __init__(self, x, t):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.ndim != 1 or x.size < 1:
            raise ValueError("x must be a vector of length >= 1")
        _check_finite(x, "x")
        t = float(t)
        if not np.isfinite(t):
            raise ValueError("t must be finite")
        self.x = x
        self.t = t

    @property
    def n(self):
        return self.x.size

    def coords(self):
        return np.append(self.x, self.t)

    @classmethod
    def from_coords(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:-1], arr[-1])

    def __add__(self, other):
        _same_dim(self, other)
        return ParaPoint(self.x + other.x, self.t + other.t)

    def __sub__(self, other):
        _same_dim(self, other)
        return ParaPoint(self.x - other.x, self.t - other.t)

    def __eq__(self, other):
        if not isinstance(other, ParaPoint):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.x, other.x) and self.t == other.t

    def __repr__(self):
        return f"ParaPoint({self.x.tolist()}, {self.t})"


def _same_dim(p, q):
    if p.n != q.n:
        raise DimensionMismatchError(f"ambient dimensions differ: {p.n} vs {q.n}")


def para_norm(p):
    """||(x,t)|| = sqrt(|x|^2 + |t|)."""
    if isinstance(p, ParaPoint):
        return float(np.sqrt(p.x @ p.x + abs(p.t)))
    arr = np.asarray(p, dtype=float)
    return float(np.sqrt(arr[:-1] @ arr[:-1] + abs(arr[-1])))


def para_norm_rows(coords):
    """Row-wise parabolic norm of an (N, n+1) coordinate array."""
    coords = np.asarray(coords, dtype=float)
    return np.sqrt(np.einsum("ij,ij->i", coords[:, :-1], coords[:, :-1]) + np.abs(coords[:, -1]))


def metric_eval(p, q, metric="parabolic"):
    """Distance between p and q, parabolic or euclidean."""
    _same_dim(p, q)
    dx = p.x - q.x
    dt = p.t - q.t
    if metric == "parabolic":
        return float(np.sqrt(dx @ dx + abs(dt)))
    if metric == "euclidean":
        return float(np.sqrt(dx @ dx + dt * dt))
    raise ValueError(f"unknown metric {metric!r}")


def dist_rows(coords, p, metric="parabolic"):
    """Distances from each row of an (N, n+1) array to the point p."""
    coords = np.asarray(coords, dtype=float)
    pc = p.coords() if isinstance(p, ParaPoint) else np.asarray(p, dtype=float)
    dx = coords[:, :-1] - pc[:-1]
    dt = coords[:, -1] - pc[-1]
    d2 = np.einsum("ij,ij->i", dx, dx)
    if metric == "parabolic":
        return np.sqrt(d2 + np.abs(dt))
    if metric == "euclidean":
        return np.sqrt(d2 + dt * dt)
    raise ValueError(f"unknown metric {metric!r}")


def dilate(r, p):
    """The parabolic dilation delta_r(x,t) = (r x, r^2 t)."""
    if r <= 0:
        raise ValueError("dilation factor must be > 0")
    return ParaPoint(r * p.x, r * r * p.t)


def blowup_map(a, r, p):
    """T_{a,r}(p) = delta_{1/r}(p - a); maps B(a,r) onto B(0,1)."""
    if r <= 0:
        raise ValueError("blow-up scale must be > 0")
    _same_dim(a, p)
    return ParaPoint((p.x - a.x) / r, (p.t - a.t) / (r * r))


def blowup_rows(a, r, coords):
    """Array version of blowup_map for (N, n+1) coordinates."""
    if r <= 0:
        raise ValueError("blow-up scale must be > 0")
    ac = a.coords() if isinstance(a, ParaPoint) else np.asarray(a, dtype=float)
    out = np.empty_like(np.asarray(coords, dtype=float))
    out[:, :-1] = (coords[:, :-1] - ac[:-1]) / r
    out[:, -1] = (coords[:, -1] - ac[-1]) / (r * r)
    return out


class HomPlane:
    """A homogeneous plane, stored as an orthonormal horizontal basis
    (rows of shape (k, n)) plus a flag saying whether the t-axis is
    included.  Parabolic Hausdorff dimension m = k + 2 if the t-axis is
    in, else m = k.
    """

    __slots__ = ("n", "horiz_basis", "includes_t_axis")

    def __init__(self, n, horiz_basis, includes_t_axis):
        n = int(n)
        if n < 1:
            raise ValueError("ambient dimension n must be >= 1")
        basis = np.asarray(horiz_basis, dtype=float)
        if basis.size == 0:
            basis = basis.reshape(0, n)
        if basis.ndim != 2 or basis.shape[1] != n:
            raise ValueError(f"horiz_basis must have shape (k, {n})")
        _check_finite(basis, "horiz_basis")
        k = basis.shape[0]
        gram = basis @ basis.T
        if k and not np.allclose(gram, np.eye(k), atol=ORTHO_TOL, rtol=0.0):
            raise ValueError("horiz_basis rows are not orthonormal within 1e-10")
        m = k + (2 if includes_t_axis else 0)
        if not 0 < m < n + 2:
            raise ValueError(f"plane dimension m={m} out of range for n={n}")
        if not includes_t_axis and not 1 <= k <= n:
            raise ValueError("horizontal plane needs 1 <= k <= n")
        if includes_t_axis and not 0 <= k <= n - 1:
            raise ValueError("vertical plane needs 0 <= k <= n-1")
        self.n = n
        self.horiz_basis = basis
        self.includes_t_axis = bool(includes_t_axis)

    @property
    def k(self):
        return self.horiz_basis.shape[0]

    @property
    def m(self):
        return self.k + (2 if self.includes_t_axis else 0)

    @property
    def family(self):
        return "vertical" if self.includes_t_axis else "horizontal"

    def horiz_projector(self):
        """The n x n orthogonal projector onto the horizontal part."""
        return self.horiz_basis.T @ self.horiz_basis

    def __eq__(self, other):
        if not isinstance(other, HomPlane):
            return NotImplemented
        if self.n != other.n or self.includes_t_axis != other.includes_t_axis:
            return False
        return bool(
            np.allclose(self.horiz_projector(), other.horiz_projector(), atol=ORTHO_TOL, rtol=0.0)
        )

    def __repr__(self):
        return f"HomPlane(n={self.n}, m={self.m}, {self.family})"

    def contains(self, p, tol=1e-9):
        return para_norm(project(self, p, "complement")) <= tol

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "includes_t_axis": self.includes_t_axis,
            "horiz_basis": [float(v) for v in self.horiz_basis.ravel()],
        }

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        flag = bool(d["includes_t_axis"])
        k = int(d["m"]) - (2 if flag else 0)
        basis = np.asarray(d["horiz_basis"], dtype=float).reshape(k, n)
        return cls(n, basis, flag)

    @classmethod
    def horizontal_axes(cls, n, axes):
        basis = np.eye(n)[list(axes)]
        return cls(n, basis, False)

    @classmethod
    def vertical_axes(cls, n, axes=()):
        basis = np.eye(n)[list(axes)] if axes else np.zeros((0, n))
        return cls(n, basis, True)

    @classmethod
    def t_axis(cls, n):
        return cls.vertical_axes(n)


def project(V, p, part="onto"):
    """Parabolic projection onto V or onto its complement.

    Horizontal V: P_V(x,t) = (Px, 0) and the complement keeps
    (x - Px, t).  Vertical V: P_V(x,t) = (Px, t), complement (x - Px, 0).
    The two parts always sum back to p.
    """
    if isinstance(p, ParaPoint):
        out = project_rows(V, p.coords()[None, :], part)[0]
        return ParaPoint.from_coords(out)
    return project_rows(V, p, part)


def project_rows(V, coords, part="onto"):
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if coords.shape[1] != V.n + 1:
        raise DimensionMismatchError(f"expected {V.n + 1} coordinates, got {coords.shape[1]}")
    x = coords[:, :-1]
    t = coords[:, -1]
    if V.k:
        xi = x @ V.horiz_basis.T
        px = xi @ V.horiz_basis
    else:
        px = np.zeros_like(x)
    out = np.empty_like(coords)
    if part == "onto":
        out[:, :-1] = px
        out[:, -1] = t if V.includes_t_axis else 0.0
    elif part == "complement":
        out[:, :-1] = x - px
        out[:, -1] = 0.0 if V.includes_t_axis else t
    else:
        raise ValueError(f"unknown part {part!r}")
    return out


def dist_to_plane_rows(V, coords):
    """Parabolic distance from each row to the plane V (= ||P_{V perp} q||)."""
    return para_norm_rows(project_rows(V, coords, "complement"))


def plane_distance(V, W):
    """Distance on the plane families: spectral norm of the difference of
    the horizontal projectors, forced to at least 1 across different
    t-axis flags so distinct families are never conflated.
    """
    if V.n != W.n:
        raise DimensionMismatchError("planes live in different ambient dimensions")
    diff = V.horiz_projector() - W.horiz_projector()
    term = float(np.max(np.abs(np.linalg.eigvalsh(diff)))) if V.n else 0.0
    if V.includes_t_axis != W.includes_t_axis:
        return max(term, 1.0)
    return term


def complement_plane(V):
    """The orthogonal complement plane: horizontal <-> vertical, with
    horizontal parts orthocomplementary in R^n; dimensions add to n+2.
    """
    n = V.n
    if V.k == 0:
        co_basis = np.eye(n)
    elif V.k == n:
        co_basis = np.zeros((0, n))
    else:
        co_basis = null_space(V.horiz_basis).T
    return HomPlane(n, co_basis, not V.includes_t_axis)


def _halton_frames(n, k, count, seed):
    """Deterministic pseudo-uniform orthonormal (k, n) frames from a
    scrambled Halton sequence pushed through normal scores and QR."""
    if k == 0:
        return [np.zeros((0, n)) for _ in range(count)]
    sampler = qmc.Halton(d=n * k, seed=seed, scramble=True)
    frames = []
    while len(frames) < count:
        u = sampler.random(1)[0]
        z = _norm_dist.ppf(u).reshape(n, k)
        q, r = np.linalg.qr(z)
        diag = np.diag(r)
        if np.min(np.abs(diag)) < 1e-12:
            continue
        q = q * np.sign(diag)
        frames.append(q.T.copy())
    return frames


def sample_planes(n, m, count, seed):
    """Exactly `count` planes of P(n,m): the axis-aligned canonical
    planes first, then seeded low-discrepancy frames, alternating the
    horizontal and vertical families whenever both exist.  Finite
    families are cycled, so repeats are possible.
    """
    n = int(n)
    m = int(m)
    count = int(count)
    if not 0 < m < n + 2:
        raise ValueError(f"m={m} out of range for n={n}")
    if count < 1:
        raise ValueError("count must be >= 1")
    has_h = 1 <= m <= n
    has_v = 2 <= m <= n + 1
    canon_h = (
        [HomPlane.horizontal_axes(n, c) for c in itertools.combinations(range(n), m)]
        if has_h
        else []
    )
    canon_v = (
        [HomPlane.vertical_axes(n, c) for c in itertools.combinations(range(n), m - 2)]
        if has_v
        else []
    )
    canon = [p for pair in itertools.zip_longest(canon_h, canon_v) for p in pair if p is not None]
    planes = canon[:count]
    need = count - len(planes)
    if need > 0:
        fill = []
        if has_h:
            k = m
            h_finite = k == n
            src = canon_h if h_finite else _halton_frames(n, k, need, seed)
            fill.append([HomPlane(n, b, False) for b in src] if not h_finite else src)
        if has_v:
            k = m - 2
            v_finite = k == 0 or k == n
            src = canon_v if v_finite else _halton_frames(n, k, need, seed + 1)
            fill.append([HomPlane(n, b, True) for b in src] if not v_finite else src)
        pools = [itertools.cycle(f) for f in fill]
        for i in range(need):
            planes.append(next(pools[i % len(pools)]))
    return planes


class Cone:
    """Parabolic cone X(p, V, s) = {q : ||P_{V perp}(q - p)|| < s ||q - p||}."""

    __slots__ = ("vertex", "plane", "aperture")

    def __init__(self, vertex, plane, aperture):
        s = float(aperture)
        if not 0.0 < s < 1.0:
            raise ValueError("aperture must lie in (0, 1)")
        if vertex.n != plane.n:
            raise DimensionMismatchError("vertex and plane dimensions differ")
        self.vertex = vertex
        self.plane = plane
        self.aperture = s

    def __repr__(self):
        return f"Cone(vertex={self.vertex!r}, plane={self.plane!r}, s={self.aperture})"


def cone_gap_rows(V, s, delta_coords):
    """||P_{V perp} d|| - s ||d|| per row; negative means inside the cone."""
    return dist_to_plane_rows(V, delta_coords) - s * para_norm_rows(delta_coords)


def cone_membership(c, q):
    """'inside', 'boundary' or 'outside', with a 1e-9 band for 'boundary'.
    The vertex itself is reported as boundary."""
    _same_dim(c.vertex, q)
    d = (q - c.vertex).coords()[None, :]
    gap = float(cone_gap_rows(c.plane, c.aperture, d)[0])
    if gap < -CONE_BAND:
        return "inside"
    if gap > CONE_BAND:
        return "outside"
    return "boundary"


def as_coord_array(points, n=None):
    """Normalize list-of-ParaPoint / (N, n+1) array input to an array."""
    if isinstance(points, np.ndarray):
        arr = np.atleast_2d(np.asarray(points, dtype=float))
    elif len(points) and isinstance(points[0], ParaPoint):
        arr = np.array([p.coords() for p in points], dtype=float)
    else:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
    if n is not None and arr.shape[1] != n + 1:
        raise DimensionMismatchError(f"expected {n + 1} coordinates per point")
    return arr


def graph_cone_check(points, V, s):
    """Check that every pair of distinct points satisfies the cone
    condition over V with aperture s.  Returns the list of violating
    index pairs; an empty list means pass.  The condition is symmetric,
    so only unordered pairs are examined.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("aperture must lie in (0, 1)")
    pts = as_coord_array(points, V.n)
    npts = pts.shape[0]
    if npts < 2:
        return []
    proj = V.horiz_projector()
    violations = []
    for i in range(npts - 1):
        d = pts[i + 1 :] - pts[i]
        dx = d[:, :-1]
        dt = d[:, -1]
        perp_x = dx - dx @ proj
        d2 = np.einsum("ij,ij->i", dx, dx)
        if V.includes_t_axis:
            a = np.sqrt(np.einsum("ij,ij->i", perp_x, perp_x))
        else:
            a = np.sqrt(np.einsum("ij,ij->i", perp_x, perp_x) + np.abs(dt))
        b = s * np.sqrt(d2 + np.abs(dt))
        bad = np.nonzero(a > b + CONE_BAND)[0]
        for j in bad:
            violations.append((i, i + 1 + int(j)))
    return violations


class GraphSamples:
    """A sampled graph over a homogeneous plane: base points P_V(p) and
    complement values P_{V perp}(p), kept as ambient (N, n+1) coordinate
    arrays.  base + values reassembles the original points exactly.
    """

    def __init__(self, plane, base, values):
        self.plane = plane
        self.base = np.atleast_2d(np.asarray(base, dtype=float))
        self.values = np.atleast_2d(np.asarray(values, dtype=float))
        if self.base.shape != self.values.shape:
            raise ValueError("base and values must have matching shapes")
        if self.base.shape[1] != plane.n + 1:
            raise DimensionMismatchError("coordinate width does not match the plane")

    @classmethod
    def from_points(cls, points, plane):
        pts = as_coord_array(points, plane.n)
        return cls(plane, project_rows(plane, pts, "onto"), project_rows(plane, pts, "complement"))

    def __len__(self):
        return self.base.shape[0]

    def reassemble(self):
        return self.base + self.values

    @property
    def base_h(self):
        """Intrinsic horizontal base coordinates, shape (N, k)."""
        return self.base[:, :-1] @ self.plane.horiz_basis.T

    @property
    def base_t(self):
        """Time coordinate of the base, or None for horizontal planes."""
        return self.base[:, -1] if self.plane.includes_t_axis else None

    @property
    def co_plane(self):
        return complement_plane(self.plane)

    @property
    def value_h(self):
        """Horizontal complement coordinates, shape (N, n - k)."""
        co = self.co_plane
        if co.k == 0:
            return np.zeros((len(self), 0))
        return self.values[:, :-1] @ co.horiz_basis.T

    @property
    def value_t(self):
        """Time coordinate of the values, or None when V is vertical."""
        return None if self.plane.includes_t_axis else self.values[:, -1]

    def as_dict(self):
        return {tuple(b): v.copy() for b, v in zip(self.base, self.values)}


class ExtractResult:
    """Output of graph_extract: the finite graph map plus the certified
    Lipschitz bound s / sqrt(1 - s^2) and the measured pairwise ratio."""

    def __init__(self, graph, lipschitz_bound, empirical_ratio):
        self.graph = graph
        self.lipschitz_bound = lipschitz_bound
        self.empirical_ratio = empirical_ratio


def graph_extract(points, V, s):
    """Extract g = P_{V perp} o (P_V|G)^{-1} from a point set satisfying
    the cone condition over V with aperture s.

    Raises ConeViolationError naming a violating pair when the cone
    check fails (two points sharing a P_V image are such a pair).
    Exact duplicate points are collapsed first.
    """
    pts = as_coord_array(points, V.n)
    pts = np.unique(pts, axis=0)
    violations = graph_cone_check(pts, V, s)
    if violations:
        i, j = violations[0]
        raise ConeViolationError(
            f"cone condition fails for pair ({i}, {j}): "
            f"{pts[i].tolist()} vs {pts[j].tolist()}",
            pair=(pts[i].copy(), pts[j].copy()),
        )
    graph = GraphSamples.from_points(pts, V)
    bound = s / np.sqrt(1.0 - s * s)
    ratio = 0.0
    nb = len(graph)
    base = graph.base
    vals = graph.values
    for i in range(nb - 1):
        db = para_norm_rows(base[i + 1 :] - base[i])
        dv = para_norm_rows(vals[i + 1 :] - vals[i])
        if np.any(db == 0.0):
            j = int(np.nonzero(db == 0.0)[0][0]) + i + 1
            raise ConeViolationError(
                f"projection to the plane is not injective: points {i} and {j}",
                pair=(base[i].copy(), base[j].copy()),
            )
        ratio = max(ratio, float(np.max(dv / db)))
    return ExtractResult(graph, float(bound), ratio)


class EuclideanPlane:
    """A linear subspace of R^{n+1} given by orthonormal basis rows,
    used only for the euclidean-cone comparison; it need not be
    homogeneous."""

    def __init__(self, basis):
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        _check_finite(basis, "basis")
        d, amb = basis.shape
        if not 1 <= d <= amb:
            raise ValueError("basis must have 1 <= rows <= columns")
        if not np.allclose(basis @ basis.T, np.eye(d), atol=ORTHO_TOL, rtol=0.0):
            raise ValueError("basis rows are not orthonormal within 1e-10")
        self.basis = basis

    @property
    def ambient(self):
        return self.basis.shape[1]

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def inside_h(self):
        return bool(np.all(np.abs(self.basis[:, -1]) < ORTHO_TOL))


class EuclidConeResult:
    def __init__(self, ok, radius, witness, checked):
        self.ok = ok
        self.radius = radius
        self.witness = witness
        self.checked = checked


def verticalize(V):
    """The vertical homogeneous plane W = {(v, t) : v in V cap H}, for a
    euclidean subspace V of R^{n+1} not contained in H."""
    if V.inside_h:
        raise ValueError("V lies inside R^n x {0}; verticalization needs V not in H")
    n = V.ambient - 1
    tcol = V.basis[:, -1][None, :]
    if V.dim == 1:
        horiz = np.zeros((0, n))
    else:
        mix = null_space(tcol).T @ V.basis
        q, r = np.linalg.qr(mix[:, :-1].T)
        horiz = (q * np.sign(np.diag(r))).T
    return HomPlane(n, horiz, True)


def euclid_cone_radius(V, s, tol=1e-3):
    """Search for r such that the euclidean cone X_E(0, V, s^2)
    intersected with B_E(0, r) lies inside the parabolic cone
    X(0, W, s), W being the verticalized plane of V.

    The check is a deterministic grid sample at relative resolution
    tol; candidate radii are halved from 1 down to tol.  Returns an
    EuclidConeResult; ok=False carries a witness point.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    if V.inside_h:
        raise ValueError("V lies inside R^n x {0}")
    if V.dim > V.ambient - 1:
        raise ValueError("V must be a proper subspace so that W exists")
    W = verticalize(V)
    amb = V.ambient
    steps = max(int(np.ceil(2.0 / tol)), 8)
    axes = [np.linspace(-1.0, 1.0, steps + 1) for _ in range(amb)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, amb)
    grid = grid[np.linalg.norm(grid, axis=1) > 0]
    witness = None
    r = 1.0
    while r >= tol:
        q = grid * r
        qn = np.linalg.norm(q, axis=1)
        keep = (qn <= r) & (qn > 0)
        q = q[keep]
        qn = qn[keep]
        perp = q - (q @ V.basis.T) @ V.basis
        in_cone = np.linalg.norm(perp, axis=1) < s * s * qn
        q = q[in_cone]
        if q.shape[0]:
            gap = cone_gap_rows(W, s, q)
            bad = np.nonzero(gap > CONE_BAND)[0]
            if bad.size == 0:
                return EuclidConeResult(True, r, None, int(q.shape[0]))
            witness = q[bad[0]].copy()
        else:
            return EuclidConeResult(True, r, None, 0)
        r *= 0.5
    return EuclidConeResult(False, None, witness, int(grid.shape[0]))
