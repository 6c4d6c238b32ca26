"""Symmetric convex bodies with exact support/gauge/volume/surface oracles.

Variants: Euclidean balls, boxes, l_p balls, H/V-polytopes, and a generic
support-oracle body used as the fallback representation of Minkowski
combinations.  All point-wise oracles are vectorized over a leading batch
axis and immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from scipy.special import gammaln

from .errors import DimensionTooLarge, UnsupportedVariant

_SYM_TOL = 1e-9


def unit_ball_volume(n: int) -> float:
    """Volume of the n-dimensional Euclidean unit ball."""
    return float(np.exp((n / 2) * np.log(np.pi) - gammaln(n / 2 + 1)))


def _as_batch(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise ValueError(f"expected dimension {dim}, got {x.shape[0]}")
        return x[None, :], True
    if x.shape[-1] != dim:
        raise ValueError(f"expected dimension {dim}, got {x.shape[-1]}")
    return x.reshape(-1, dim), False


def _unbatch(values, single):
    return float(values[0]) if single else values


class ConvexBody:
    """Base class; subclasses fill in the exact oracles they support."""

    dim: int
    variant: str

    def support(self, u):
        """h_K(u) = max over K of <u, .>; positively homogeneous, even."""
        raise NotImplementedError

    def gauge(self, x):
        """Minkowski functional: inf{t > 0 : x in tK}."""
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-12):
        X, single = _as_batch(x, self.dim)
        inside = self.gauge(X) <= 1.0 + tol
        return bool(inside[0]) if single else inside

    def polar(self) -> "ConvexBody":
        raise UnsupportedVariant(f"no exact polar for {self.variant}")

    def volume(self) -> float:
        raise UnsupportedVariant(f"no exact volume for {self.variant}")

    def surface_area(self) -> float:
        raise UnsupportedVariant(f"no exact surface area for {self.variant}")

    def scale(self, t: float) -> "ConvexBody":
        """Homothet tK."""
        raise UnsupportedVariant(f"no scaling for {self.variant}")

    def bounding_half_widths(self) -> np.ndarray:
        """Axis-aligned bounding box half-widths, from axis supports."""
        eye = np.eye(self.dim)
        return np.array([float(self.support(eye[i])) for i in range(self.dim)])

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


@dataclass(frozen=True, repr=False)
class EuclideanBall(ConvexBody):
    radius: float
    dim: int
    variant: str = field(default="ball", init=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def support(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.radius * np.linalg.norm(U, axis=-1), single)

    def gauge(self, x):
        X, single = _as_batch(x, self.dim)
        return _unbatch(np.linalg.norm(X, axis=-1) / self.radius, single)

    def polar(self):
        return EuclideanBall(1.0 / self.radius, self.dim)

    def volume(self):
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def surface_area(self):
        return self.dim * unit_ball_volume(self.dim) * self.radius ** (self.dim - 1)

    def scale(self, t):
        return EuclideanBall(t * self.radius, self.dim)

    def descriptor(self):
        return {"variant": "ball", "dimension": self.dim, "radius": self.radius}


@dataclass(frozen=True, repr=False)
class Box(ConvexBody):
    """Axis-aligned symmetric box given by its half-widths."""

    half_widths: np.ndarray

    def __post_init__(self):
        hw = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if np.any(hw <= 0):
            raise ValueError("half-widths must be positive")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "dim", hw.size)
        object.__setattr__(self, "variant", "box")

    def support(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(np.abs(U) @ self.half_widths, single)

    def gauge(self, x):
        X, single = _as_batch(x, self.dim)
        return _unbatch(np.max(np.abs(X) / self.half_widths, axis=-1), single)

    def active_facet(self, x):
        """Index of the facet whose cone contains x (lowest index on ties)."""
        X, single = _as_batch(x, self.dim)
        idx = np.argmax(np.abs(X) / self.half_widths, axis=-1)
        return int(idx[0]) if single else idx

    def polar(self):
        # Cross-polytope with vertices +-e_i / w_i.
        eye = np.eye(self.dim)
        verts = np.concatenate([eye / self.half_widths[:, None],
                                -eye / self.half_widths[:, None]])
        return VPolytope(verts)

    def volume(self):
        return float(np.prod(2.0 * self.half_widths))

    def surface_area(self):
        vol = self.volume()
        return float(np.sum(vol / self.half_widths))

    def scale(self, t):
        return Box(t * self.half_widths)

    def vertices(self):
        corners = np.stack(np.meshgrid(*[(-w, w) for w in self.half_widths],
                                       indexing="ij"), axis=-1)
        return corners.reshape(-1, self.dim)

    def descriptor(self):
        return {"variant": "box", "dimension": self.dim,
                "half_widths": [float(w) for w in self.half_widths]}


@dataclass(frozen=True, repr=False)
class LpBall(ConvexBody):
    p: float
    radius: float
    dim: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "variant", "lp_ball")

    def _norm(self, X):
        if np.isinf(self.p):
            return np.max(np.abs(X), axis=-1)
        return np.sum(np.abs(X) ** self.p, axis=-1) ** (1.0 / self.p)

    def support(self, u):
        # h = r * |u|_q with 1/p + 1/q = 1
        U, single = _as_batch(u, self.dim)
        if self.p == 1.0:
            vals = np.max(np.abs(U), axis=-1)
        elif np.isinf(self.p):
            vals = np.sum(np.abs(U), axis=-1)
        else:
            q = self.p / (self.p - 1.0)
            vals = np.sum(np.abs(U) ** q, axis=-1) ** (1.0 / q)
        return _unbatch(self.radius * vals, single)

    def gauge(self, x):
        X, single = _as_batch(x, self.dim)
        return _unbatch(self._norm(X) / self.radius, single)

    def polar(self):
        if self.p == 1.0:
            q = np.inf
        elif np.isinf(self.p):
            q = 1.0
        else:
            q = self.p / (self.p - 1.0)
        return LpBall(q, 1.0 / self.radius, self.dim)

    def volume(self):
        if np.isinf(self.p):
            return (2.0 * self.radius) ** self.dim
        n, p = self.dim, self.p
        logv = n * (np.log(2 * self.radius) + gammaln(1 + 1 / p)) - gammaln(1 + n / p)
        return float(np.exp(logv))

    def surface_area(self):
        n, r = self.dim, self.radius
        if np.isinf(self.p):
            return Box(np.full(n, r)).surface_area()
        if self.p == 2.0:
            return EuclideanBall(r, n).surface_area()
        if self.p == 1.0:
            # 2^n simplex facets, each of area sqrt(n) r^(n-1) / (n-1)!
            return float(2**n * np.sqrt(n) * r ** (n - 1) / np.exp(gammaln(n)))
        raise UnsupportedVariant(f"no closed-form surface area for p={self.p}")

    def scale(self, t):
        return LpBall(self.p, t * self.radius, self.dim)

    def descriptor(self):
        return {"variant": "lp_ball", "dimension": self.dim,
                "p": float(self.p), "radius": float(self.radius)}


def _check_negation_closed(points, what):
    pts = np.asarray(points, dtype=float)
    for v in pts:
        d = np.min(np.linalg.norm(pts + v, axis=1))
        if d > _SYM_TOL * max(1.0, np.linalg.norm(v)):
            raise ValueError(f"{what} not closed under negation (miss {v})")


class HPolytope(ConvexBody):
    """Intersection of half-spaces <n_i, x> <= h_i with unit normals n_i."""

    def __init__(self, normals, offsets):
        normals = np.asarray(normals, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        if normals.ndim != 2 or normals.shape[0] != offsets.size:
            raise ValueError("normals (m,n) and offsets (m,) required")
        if np.any(offsets <= 0):
            raise ValueError("offsets must be positive (origin interior)")
        norms = np.linalg.norm(normals, axis=1)
        self.normals = normals / norms[:, None]
        self.offsets = offsets / norms
        _check_negation_closed(self.normals / self.offsets[:, None], "facet set")
        self.dim = normals.shape[1]
        self.variant = "h_polytope"
        self._vertices = None

    def gauge(self, x):
        X, single = _as_batch(x, self.dim)
        vals = np.max((X @ self.normals.T) / self.offsets, axis=-1)
        return _unbatch(np.maximum(vals, 0.0), single)

    def active_facet(self, x):
        X, single = _as_batch(x, self.dim)
        idx = np.argmax((X @ self.normals.T) / self.offsets, axis=-1)
        return int(idx[0]) if single else idx

    def vertices(self):
        """Vertex enumeration through the polar V-polytope's facets."""
        if self._vertices is None:
            polar_pts = self.normals / self.offsets[:, None]
            hull = ConvexHull(polar_pts)
            eqs = hull.equations  # a.x + b <= 0, |a| = 1
            self._vertices = -eqs[:, :-1] / eqs[:, -1][:, None]
        return self._vertices

    def support(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(np.max(U @ self.vertices().T, axis=-1), single)

    def polar(self):
        return VPolytope(self.normals / self.offsets[:, None])

    def volume(self):
        return VPolytope(self.vertices()).volume()

    def surface_area(self):
        return VPolytope(self.vertices()).surface_area()

    def scale(self, t):
        return HPolytope(self.normals, t * self.offsets)

    def descriptor(self):
        return {"variant": "h_polytope", "dimension": self.dim,
                "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


class VPolytope(ConvexBody):
    """Convex hull of a symmetric vertex list."""

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2:
            raise ValueError("vertices must be (m, n)")
        _check_negation_closed(vertices, "vertex set")
        self.dim = vertices.shape[1]
        self.variant = "v_polytope"
        self._hull = ConvexHull(vertices)
        self.vertices = vertices[self._hull.vertices]
        eqs = self._hull.equations
        self.facet_normals = eqs[:, :-1]
        self.facet_offsets = -eqs[:, -1]
        if np.any(self.facet_offsets <= 0):
            raise ValueError("origin must be interior")

    def support(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(np.max(U @ self.vertices.T, axis=-1), single)

    def gauge(self, x):
        X, single = _as_batch(x, self.dim)
        vals = np.max((X @ self.facet_normals.T) / self.facet_offsets, axis=-1)
        return _unbatch(np.maximum(vals, 0.0), single)

    def active_facet(self, x):
        X, single = _as_batch(x, self.dim)
        idx = np.argmax((X @ self.facet_normals.T) / self.facet_offsets, axis=-1)
        return int(idx[0]) if single else idx

    def polar(self):
        norms = np.linalg.norm(self.vertices, axis=1)
        return HPolytope(self.vertices / norms[:, None], 1.0 / norms)

    def volume(self):
        if self.dim > 3:
            raise DimensionTooLarge(
                "exact polytope volume limited to n <= 3; use volume_mc")
        return float(self._hull.volume)

    def surface_area(self):
        if self.dim > 3:
            raise DimensionTooLarge(
                "exact polytope surface limited to n <= 3; use Monte Carlo")
        if self.dim == 2:
            return float(self._hull.area)  # qhull 'area' is the perimeter in 2D
        return float(self._hull.area)

    def scale(self, t):
        return VPolytope(t * self.vertices)

    def ordered_vertices_2d(self):
        if self.dim != 2:
            raise UnsupportedVariant("ordered vertices only in 2D")
        ang = np.arctan2(self.vertices[:, 1], self.vertices[:, 0])
        return self.vertices[np.argsort(ang)]

    def facet_simplices(self):
        """Facet simplices (qhull triangulation) for boundary sampling."""
        return self.vertices_all()[self._hull.simplices]

    def vertices_all(self):
        return self._hull.points

    def descriptor(self):
        return {"variant": "v_polytope", "dimension": self.dim,
                "vertices": self.vertices.tolist()}


class SupportOracleBody(ConvexBody):
    """Body known only by its support function.

    Membership uses the dual characterization x in M iff <x,u> <= h_M(u) over
    a fixed direction net, an *outer* approximation whose resolution is the
    net size.  refine() returns the same body with a denser net.
    """

    def __init__(self, dim, support_fn, net_size=256, net_seed=0):
        self.dim = dim
        self.variant = "support_oracle"
        self._support_fn = support_fn
        self.net_size = net_size
        self.net_seed = net_seed
        self._net = _direction_net(dim, net_size, net_seed)
        self._net_supports = np.asarray(support_fn(self._net), dtype=float)

    def support(self, u):
        U, single = _as_batch(u, self.dim)
        vals = np.asarray(self._support_fn(U), dtype=float)
        return _unbatch(vals, single)

    def gauge(self, x):
        # Outer gauge from the net: ||x|| >= max_j <x,u_j>/h(u_j).
        X, single = _as_batch(x, self.dim)
        vals = np.max((X @ self._net.T) / self._net_supports, axis=-1)
        return _unbatch(np.maximum(vals, 0.0), single)

    def refine(self, factor=4):
        return SupportOracleBody(self.dim, self._support_fn,
                                 self.net_size * factor, self.net_seed)

    def descriptor(self):
        return {"variant": "support_oracle", "dimension": self.dim,
                "net_size": self.net_size}


def _direction_net(dim, size, seed):
    if dim == 2:
        ang = np.linspace(0.0, 2 * np.pi, size, endpoint=False)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(np.random.SeedSequence([seed, dim, size]))
    u = rng.standard_normal((size // 2, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return np.concatenate([u, -u])


def gauge_by_support_lp(body: ConvexBody, x) -> float:
    """Gauge via the dual LP min t s.t. x in tK, for cross-checks only."""
    # For a V-polytope: ||x||_K = min sum |c_i| with x = sum c_i v_i.
    if not isinstance(body, VPolytope):
        raise UnsupportedVariant("LP gauge implemented for V-polytopes")
    V = body.vertices
    m = V.shape[0]
    res = linprog(np.ones(m), A_eq=V.T, b_eq=np.asarray(x, float),
                  bounds=[(0, None)] * m, method="highs")
    if not res.success:
        raise ArithmeticError(f"gauge LP failed: {res.message}")
    return float(res.fun)


# ---------------------------------------------------------------------------
# Minkowski combinations


def minkowski_combo(K: ConvexBody, L: ConvexBody, lam: float,
                    net_size: int = 256) -> ConvexBody:
    """lam*K + (1-lam)*L, exactly when representable, else a support oracle."""
    if K.dim != L.dim:
        raise ValueError("dimension mismatch")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    if lam == 0.0:
        return L
    if lam == 1.0:
        return K
    mu = 1.0 - lam
    if isinstance(K, EuclideanBall) and isinstance(L, EuclideanBall):
        return EuclideanBall(lam * K.radius + mu * L.radius, K.dim)
    if isinstance(K, Box) and isinstance(L, Box):
        return Box(lam * K.half_widths + mu * L.half_widths)
    if isinstance(K, LpBall) and isinstance(L, LpBall) and K.p == L.p:
        return LpBall(K.p, lam * K.radius + mu * L.radius, K.dim)
    if isinstance(K, VPolytope) and isinstance(L, VPolytope):
        sums = (lam * K.vertices)[:, None, :] + (mu * L.vertices)[None, :, :]
        return VPolytope(sums.reshape(-1, K.dim))
    if isinstance(K, Box) and isinstance(L, VPolytope):
        return minkowski_combo(VPolytope(K.vertices()), L, lam)
    if isinstance(K, VPolytope) and isinstance(L, Box):
        return minkowski_combo(K, VPolytope(L.vertices()), lam)

    def h(U):
        return lam * np.asarray(K.support(U)) + mu * np.asarray(L.support(U))

    return SupportOracleBody(K.dim, h, net_size=net_size)


# ---------------------------------------------------------------------------
# Volume / surface helpers


def volume(body: ConvexBody, n_samples: int | None = None, seed: int = 0):
    """Exact volume when available; bounding-box Monte Carlo otherwise.

    Returns a float for exact variants and an MCEstimate for sampled ones.
    """
    from .estimate import from_indicator

    try:
        return body.volume()
    except (DimensionTooLarge, UnsupportedVariant):
        if n_samples is None:
            raise
    hw = body.bounding_half_widths()
    box_vol = float(np.prod(2 * hw))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-hw, hw, size=(n_samples, body.dim))
    est = from_indicator(body.contains(pts), seed)
    return MCScaled(est, box_vol)


def MCScaled(est, factor):
    from .estimate import MCEstimate

    return MCEstimate(est.value * factor, est.std_error * factor,
                      est.n_samples, est.seed)


def scale_to_unit_volume(body: ConvexBody) -> ConvexBody:
    v = body.volume()
    return body.scale(v ** (-1.0 / body.dim))


def isoperimetric_ratio(body: ConvexBody) -> float:
    """S(K) / vol(K)^((n-1)/n); minimized by the ball at n * omega_n^(1/n)."""
    v = body.volume()
    return body.surface_area() / v ** ((body.dim - 1) / body.dim)


# ---------------------------------------------------------------------------
# Randomized convexity testing


@dataclass(frozen=True)
class ConvexWitnessed:
    """No counterexample found; probabilistic, not a proof."""

    pairs_tested: int


@dataclass(frozen=True)
class NonConvexWitness:
    x: np.ndarray
    y: np.ndarray
    midpoint: np.ndarray


def is_convex_region(contains, box: Box, trials: int, seed: int = 0,
                     batch: int = 4096):
    """Search for x, y in the region whose midpoint leaves it.

    ``contains`` is a vectorized membership predicate over (m, n) points;
    ``box`` bounds the sampled part of the region.
    """
    rng = np.random.default_rng(seed)
    hw = box.half_widths
    tested = 0
    while tested < trials:
        m = min(batch, trials - tested)
        x = rng.uniform(-hw, hw, size=(m, box.dim))
        y = rng.uniform(-hw, hw, size=(m, box.dim))
        both = np.asarray(contains(x)) & np.asarray(contains(y))
        tested += m
        if not np.any(both):
            continue
        xs, ys = x[both], y[both]
        mids = 0.5 * (xs + ys)
        bad = ~np.asarray(contains(mids))
        if np.any(bad):
            j = int(np.argmax(bad))
            return NonConvexWitness(xs[j], ys[j], mids[j])
    return ConvexWitnessed(trials)
