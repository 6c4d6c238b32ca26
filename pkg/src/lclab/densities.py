"""Closed-form log-concave density families f = exp(-psi).

Potentials are normalized so that the density integrates to one; gradients
are defined almost everywhere, with facet ties broken by lowest facet index.
All oracles are vectorized over a leading batch axis and immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln, kv

from . import bodies as bd
from .errors import (LineSearchNoConverge, OutsideSupport, RejectionStall,
                     SingularEstimate, UnsupportedVariant)


def _as_batch(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x.reshape(-1, dim), False


@dataclass(frozen=True)
class AffineMap:
    """y = T (x - center): the centering + whitening transforms."""

    T: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "_Tinv", np.linalg.inv(T))
        sign, logdet = np.linalg.slogdet(T)
        if sign == 0:
            raise ValueError("T must be invertible")
        object.__setattr__(self, "log_abs_det", float(logdet))

    @property
    def Tinv(self):
        return self._Tinv

    def apply(self, x):
        return (np.asarray(x, float) - self.center) @ self.T.T

    def invert(self, y):
        return np.asarray(y, float) @ self._Tinv.T + self.center

    @staticmethod
    def identity(dim):
        return AffineMap(np.eye(dim), np.zeros(dim))


class LogConcaveDensity:
    """Base class for the density families."""

    dim: int
    variant: str
    even: bool = True
    essentially_continuous: bool = True

    def potential(self, x):
        """psi(x) with f = exp(-psi) normalized; +inf outside the support."""
        raise NotImplementedError

    def grad_potential(self, x):
        raise NotImplementedError

    def density(self, x):
        X, single = _as_batch(x, self.dim)
        vals = np.exp(-self.potential(X))
        return float(vals[0]) if single else vals

    @property
    def f0(self) -> float:
        return float(self.density(np.zeros(self.dim)))

    @property
    def sup_density(self) -> float:
        """||f||_inf; equals f(0) for the even families implemented here."""
        if self.even:
            return self.f0
        raise UnsupportedVariant("sup_density only closed-form for even families")

    @property
    def has_exact_sampler(self) -> bool:
        return False

    def sample(self, n, rng):
        raise UnsupportedVariant(f"{self.variant} has no exact sampler")

    def functional_perimeter_exact(self):
        """Closed form for int |grad psi| dmu, where one exists."""
        raise UnsupportedVariant(f"no closed-form perimeter for {self.variant}")

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class Gaussian(LogConcaveDensity):
    def __init__(self, dim, sigma=1.0):
        self.dim = dim
        self.sigma = float(sigma)
        self.variant = "gaussian"
        self._log_z = 0.5 * dim * np.log(2 * np.pi * self.sigma**2)

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        vals = 0.5 * np.sum(X * X, axis=-1) / self.sigma**2 + self._log_z
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        g = X / self.sigma**2
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        return self.sigma * rng.standard_normal((n, self.dim))

    def functional_perimeter_exact(self):
        n = self.dim
        return float(np.sqrt(2) * np.exp(gammaln((n + 1) / 2) - gammaln(n / 2))
                     / self.sigma)

    def radial_profile(self):
        return lambda r: 0.5 * np.asarray(r) ** 2 / self.sigma**2 + self._log_z

    def descriptor(self):
        return {"variant": "gaussian", "dimension": self.dim, "sigma": self.sigma}


class NormExponential(LogConcaveDensity):
    """Density exp(-||x||_K) / (n! vol(K)) for a symmetric body K."""

    def __init__(self, body: bd.ConvexBody):
        self.body = body
        self.dim = body.dim
        self.variant = "norm_exponential"
        self._log_z = gammaln(self.dim + 1) + np.log(body.volume())

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        vals = np.asarray(self.body.gauge(X)) + self._log_z
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        g = gauge_gradient(self.body, X)
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        u = cone_boundary_sample(self.body, n, rng)
        s = rng.gamma(self.dim, size=n)
        return s[:, None] * u

    def functional_perimeter_exact(self):
        # The t-independent identity: S(K) / (n vol(K)).
        return self.body.surface_area() / (self.dim * self.body.volume())

    def gauge_cdf(self, t):
        """P(||x||_K <= t): the radial Gamma(n) law."""
        from scipy.special import gammainc

        return float(gammainc(self.dim, t))

    def descriptor(self):
        return {"variant": "norm_exponential", "dimension": self.dim,
                "body": self.body.descriptor()}


def isotropic_cube_exponential(dim) -> NormExponential:
    """NormExponential over the cube scaled so the measure is isotropic.

    Var(x_1) = (n+1)(n+2) w^2 / 3 under exp(-||x||_K), so w = sqrt(3/((n+1)(n+2))).
    """
    w = np.sqrt(3.0 / ((dim + 1) * (dim + 2)))
    return NormExponential(bd.Box(np.full(dim, w)))


def isotropic_ball_exponential(dim) -> NormExponential:
    """NormExponential over the ball of radius 1/sqrt(n+1); E|x|^2 = n."""
    return NormExponential(bd.EuclideanBall(1.0 / np.sqrt(dim + 1), dim))


class RadialDensity(LogConcaveDensity):
    """Radial family exp(-(g(|x|) + log Z)) for a convex increasing profile g."""

    def __init__(self, dim, g, gprime, r_max=None, n_grid=4096):
        self.dim = dim
        self.variant = "radial"
        self._g = g
        self._gprime = gprime
        r_max = r_max if r_max is not None else self._find_r_max()
        self.r_max = r_max
        # Radius density ~ r^(n-1) exp(-g(r)); normalized numerically.
        grid = np.linspace(0.0, r_max, n_grid)
        logw = (dim - 1) * np.log(np.maximum(grid, 1e-300)) - g(grid)
        w = np.exp(logw - logw.max())
        cdf = np.concatenate([[0.0], np.cumsum((w[1:] + w[:-1]) * 0.5 * np.diff(grid))])
        total = cdf[-1]
        self._radial_grid = grid
        self._radial_cdf = cdf / total
        log_nom = np.log(dim) + np.log(bd.unit_ball_volume(dim))
        self._log_z = log_nom + np.log(total) + logw.max()

    def _find_r_max(self):
        g = self._g
        r = 1.0
        peak = -np.inf
        for _ in range(200):
            val = (self.dim - 1) * np.log(r) - g(np.array([r]))[0]
            peak = max(peak, val)
            if val < peak - 60:
                return r
            r *= 1.5
        raise LineSearchNoConverge("radial profile does not decay")

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        vals = self._g(np.linalg.norm(X, axis=-1)) + self._log_z
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        r = np.linalg.norm(X, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = self._gprime(r)[:, None] * X / r[:, None]
        g[r == 0] = 0.0
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        u = rng.standard_normal((n, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = np.interp(rng.uniform(size=n), self._radial_cdf, self._radial_grid)
        return r[:, None] * u

    def radial_profile(self):
        """Normalized profile: psi(x) = profile(|x|)."""
        return lambda r: self._g(np.asarray(r, float)) + self._log_z

    def descriptor(self):
        return {"variant": "radial", "dimension": self.dim}


class RadialPower(RadialDensity):
    """g(r) = (r/sigma)^p; sigma defaults to the isotropic scaling."""

    def __init__(self, dim, p, sigma=None):
        if p < 1:
            raise ValueError("p must be >= 1")
        if sigma is None:
            sigma = np.sqrt(dim * np.exp(gammaln(dim / p) - gammaln((dim + 2) / p)))
        self.p = float(p)
        self.sigma = float(sigma)

        def g(r):
            return (np.asarray(r, float) / sigma) ** p

        def gprime(r):
            return (p / sigma) * (np.asarray(r, float) / sigma) ** (p - 1)

        super().__init__(dim, g, gprime)
        self.variant = "radial_power"
        # Closed-form normalizer overrides the numeric one.
        self._log_z = (np.log(dim) + np.log(bd.unit_ball_volume(dim))
                       + dim * np.log(sigma) + gammaln(dim / p) - np.log(p))

    def sample(self, n, rng):
        u = rng.standard_normal((n, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.sigma * rng.gamma(self.dim / self.p, size=n) ** (1.0 / self.p)
        return r[:, None] * u

    def moment(self, q):
        """E |x|^q."""
        n, p = self.dim, self.p
        return float(self.sigma**q * np.exp(gammaln((n + q) / p) - gammaln(n / p)))

    def functional_perimeter_exact(self):
        n, p = self.dim, self.p
        return float((p / self.sigma)
                     * np.exp(gammaln((n + p - 1) / p) - gammaln(n / p)))

    def descriptor(self):
        return {"variant": "radial_power", "dimension": self.dim,
                "p": self.p, "sigma": self.sigma}


def _pexp_log_beta(p):
    return (p / 2) * (gammaln(3 / p) - gammaln(1 / p))


def _pexp_log_c(p):
    return np.log(p / 2) + 0.5 * gammaln(3 / p) - 1.5 * gammaln(1 / p)


def pexp_gradient_moment(p, alpha):
    """Closed form of the coordinate moment int |psi'|^(1+alpha) f_p dx.

    Evaluated through log-Gamma to stay stable for large p.
    """
    a = 1.0 + alpha
    return float(np.exp(a * np.log(p)
                        + (a / 2) * (gammaln(3 / p) - gammaln(1 / p))
                        + gammaln(((p - 1) * a + 1) / p) - gammaln(1 / p)))


class ProductPExp(LogConcaveDensity):
    """Product of the isotropic 1D densities c_p exp(-beta_p |t|^p)."""

    def __init__(self, dim, p):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.dim = dim
        self.p = float(p)
        self.variant = "product_pexp"
        self._log_beta = _pexp_log_beta(p)
        self._beta = float(np.exp(self._log_beta))
        self._log_z = -dim * _pexp_log_c(p)

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        vals = self._beta * np.sum(np.abs(X) ** self.p, axis=-1) + self._log_z
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        g = self.p * self._beta * np.abs(X) ** (self.p - 1) * np.sign(X)
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        gam = rng.gamma(1.0 / self.p, size=(n, self.dim))
        mags = (gam / self._beta) ** (1.0 / self.p)
        return mags * rng.choice([-1.0, 1.0], size=(n, self.dim))

    def coordinate_gradient_moment(self, alpha):
        return pexp_gradient_moment(self.p, alpha)

    def functional_perimeter_exact(self):
        if self.dim == 1:
            return pexp_gradient_moment(self.p, 0.0)
        raise UnsupportedVariant("closed form only in one dimension")

    def descriptor(self):
        return {"variant": "product_pexp", "dimension": self.dim, "p": self.p}


def pseudo_huber_unit_variance():
    """Variance of the density ~ exp(-sqrt(t^2+1)): (K3(1)-K1(1))/(4 K1(1))."""
    return float((kv(3, 1.0) - kv(1, 1.0)) / (4.0 * kv(1, 1.0)))


class PseudoHuberProduct(LogConcaveDensity):
    """Product of coordinates with potential sqrt((s t)^2 + 1).

    scale=1 is the raw family; scale=sqrt(unit variance) makes it isotropic.
    Its gradient-sublevel sets {|grad psi| <= c} are non-convex, which is what
    this family is here to exhibit.
    """

    def __init__(self, dim, scale=1.0):
        self.dim = dim
        self.scale = float(scale)
        self.variant = "pseudo_huber"
        self._log_z1 = np.log(2.0 * kv(1, 1.0) / self.scale)
        self._log_z = dim * self._log_z1

    @classmethod
    def isotropic(cls, dim):
        return cls(dim, scale=np.sqrt(pseudo_huber_unit_variance()))

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        vals = np.sum(np.sqrt((self.scale * X) ** 2 + 1.0), axis=-1) + self._log_z
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        g = self.scale**2 * X / np.sqrt((self.scale * X) ** 2 + 1.0)
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        # Rejection from Laplace: accept with exp(|t| - sqrt(t^2+1)) <= 1.
        out = np.empty((n, self.dim))
        need = n * self.dim
        got = 0
        flat = out.reshape(-1)
        while got < need:
            m = max(int(1.8 * (need - got)) + 16, 64)
            t = rng.exponential(size=m) * rng.choice([-1.0, 1.0], size=m)
            keep = rng.uniform(size=m) < np.exp(np.abs(t) - np.sqrt(t * t + 1.0))
            acc = t[keep]
            take = min(acc.size, need - got)
            flat[got:got + take] = acc[:take]
            got += take
        return out / self.scale

    def descriptor(self):
        return {"variant": "pseudo_huber", "dimension": self.dim,
                "scale": self.scale}


class Uniform(LogConcaveDensity):
    """Normalized Lebesgue measure on a symmetric body (indicator density)."""

    essentially_continuous = False

    def __init__(self, body: bd.ConvexBody):
        self.body = body
        self.dim = body.dim
        self.variant = "uniform"
        self._log_vol = np.log(body.volume())

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        inside = np.asarray(self.body.gauge(X)) <= 1.0 + 1e-12
        vals = np.where(inside, self._log_vol, np.inf)
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        if np.any(np.asarray(self.body.gauge(X)) > 1.0 + 1e-12):
            raise OutsideSupport("gradient undefined outside the support body")
        g = np.zeros_like(X)
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return True

    def sample(self, n, rng):
        if isinstance(self.body, bd.Box):
            hw = self.body.half_widths
            return rng.uniform(-hw, hw, size=(n, self.dim))
        u = cone_boundary_sample(self.body, n, rng)
        s = rng.uniform(size=n) ** (1.0 / self.dim)
        return s[:, None] * u

    def functional_perimeter_exact(self):
        return 0.0  # grad psi = 0 a.e.; the boundary term lives in nu_f

    def descriptor(self):
        return {"variant": "uniform", "dimension": self.dim,
                "body": self.body.descriptor()}


def isotropic_uniform_cube(dim) -> Uniform:
    return Uniform(bd.Box(np.full(dim, np.sqrt(3.0))))


class AffinePushforward(LogConcaveDensity):
    """Density of Y = T (X - center) for X distributed as the base family."""

    def __init__(self, base: LogConcaveDensity, amap: AffineMap):
        self.base = base
        self.amap = amap
        self.dim = base.dim
        self.variant = "affine_pushforward"
        self.even = base.even and bool(np.allclose(amap.center, 0.0))
        self.essentially_continuous = base.essentially_continuous

    def potential(self, y):
        Y, single = _as_batch(y, self.dim)
        vals = self.base.potential(self.amap.invert(Y)) + self.amap.log_abs_det
        # log|det T^-1| = -log|det T|; f_Y = f_X(T^-1 y + c) / |det T^-1|... sign:
        # f_Y(y) = f_X(T^{-1}y + c) * |det T^{-1}| => psi_Y = psi_X - log|det T^{-1}|
        return float(np.atleast_1d(vals)[0]) if single else vals

    def grad_potential(self, y):
        Y, single = _as_batch(y, self.dim)
        gx = self.base.grad_potential(self.amap.invert(Y))
        g = np.atleast_2d(gx) @ self.amap.Tinv
        return g[0] if single else g

    @property
    def has_exact_sampler(self):
        return self.base.has_exact_sampler

    def sample(self, n, rng):
        return self.amap.apply(self.base.sample(n, rng))

    def descriptor(self):
        return {"variant": "affine_pushforward", "dimension": self.dim,
                "base": self.base.descriptor(),
                "T": self.amap.T.tolist(), "center": self.amap.center.tolist()}


class Truncation(LogConcaveDensity):
    """base density restricted to a region and renormalized by its mass."""

    essentially_continuous = False

    def __init__(self, base: LogConcaveDensity, region, mass: float,
                 stall_threshold: float = 1e-3):
        self.base = base
        self.region = region
        self.mass = float(mass)
        self.dim = base.dim
        self.variant = "truncation"
        self.even = base.even and getattr(region, "claimed_symmetric", True)
        self._stall = stall_threshold

    def potential(self, x):
        X, single = _as_batch(x, self.dim)
        inside = np.asarray(self.region.contains(X))
        vals = np.where(inside, self.base.potential(X) + np.log(self.mass), np.inf)
        return float(vals[0]) if single else vals

    def grad_potential(self, x):
        X, single = _as_batch(x, self.dim)
        if not np.all(self.region.contains(X)):
            raise OutsideSupport("gradient undefined outside the region")
        g = self.base.grad_potential(X)
        return g if not single else np.atleast_2d(g)[0]

    @property
    def has_exact_sampler(self):
        return self.base.has_exact_sampler

    def sample(self, n, rng):
        out = np.empty((n, self.dim))
        got = 0
        probe_drawn = 0
        probe_kept = 0
        while got < n:
            m = max(min(4 * (n - got) + 64, 1 << 20), 256)
            x = self.base.sample(m, rng)
            keep = np.asarray(self.region.contains(x))
            acc = x[keep]
            probe_drawn += m
            probe_kept += acc.shape[0]
            if probe_drawn >= 1 << 16 and probe_kept < self._stall * probe_drawn:
                raise RejectionStall(
                    f"acceptance {probe_kept / probe_drawn:.2e} below "
                    f"{self._stall:.0e} after {probe_drawn} proposals")
            take = min(acc.shape[0], n - got)
            out[got:got + take] = acc[:take]
            got += take
        return out

    def descriptor(self):
        return {"variant": "truncation", "dimension": self.dim,
                "base": self.base.descriptor(), "mass": self.mass}


# ---------------------------------------------------------------------------
# Gauge gradients and cone-measure boundary sampling


def gauge_gradient(body: bd.ConvexBody, X):
    """Gradient of x -> ||x||_K, chosen as the active facet normal a.e."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(body, bd.EuclideanBall):
        r = np.linalg.norm(X, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = X / (r * body.radius)
        g[r[:, 0] == 0] = 0.0
        return g
    if isinstance(body, bd.Box):
        idx = body.active_facet(X)
        g = np.zeros_like(X)
        rows = np.arange(X.shape[0])
        g[rows, idx] = np.sign(X[rows, idx]) / body.half_widths[idx]
        return g
    if isinstance(body, bd.LpBall):
        if np.isinf(body.p):
            idx = np.argmax(np.abs(X), axis=-1)
            g = np.zeros_like(X)
            rows = np.arange(X.shape[0])
            g[rows, idx] = np.sign(X[rows, idx]) / body.radius
            return g
        p = body.p
        norm = np.sum(np.abs(X) ** p, axis=-1) ** (1.0 / p)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = (np.sign(X) * np.abs(X) ** (p - 1)
                 / np.maximum(norm, 1e-300)[:, None] ** (p - 1)) / body.radius
        g[norm == 0] = 0.0
        return g
    if isinstance(body, (bd.VPolytope, bd.HPolytope)):
        normals = body.facet_normals if isinstance(body, bd.VPolytope) else body.normals
        offsets = body.facet_offsets if isinstance(body, bd.VPolytope) else body.offsets
        idx = body.active_facet(X)
        return normals[idx] / offsets[idx][:, None]
    raise UnsupportedVariant(f"no gauge gradient for {body.variant}")


def cone_boundary_sample(body: bd.ConvexBody, n, rng):
    """Sample the boundary of K under the cone (volume) measure."""
    if isinstance(body, bd.EuclideanBall):
        u = rng.standard_normal((n, body.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return body.radius * u
    if isinstance(body, bd.Box):
        # Every facet cone has volume vol(K)/(2n): facet index uniform.
        d = body.dim
        idx = rng.integers(0, d, size=n)
        signs = rng.choice([-1.0, 1.0], size=n)
        pts = rng.uniform(-1.0, 1.0, size=(n, d)) * body.half_widths
        pts[np.arange(n), idx] = signs * body.half_widths[idx]
        return pts
    if isinstance(body, bd.LpBall) and body.p == 1.0:
        # Cross-polytope: orthant uniform, simplex point via Dirichlet.
        w = rng.dirichlet(np.ones(body.dim), size=n)
        return body.radius * w * rng.choice([-1.0, 1.0], size=(n, body.dim))
    if isinstance(body, bd.LpBall) and np.isinf(body.p):
        return cone_boundary_sample(bd.Box(np.full(body.dim, body.radius)), n, rng)
    if isinstance(body, bd.VPolytope) and body.dim == 2:
        v = body.ordered_vertices_2d()
        nxt = np.roll(v, -1, axis=0)
        cone_areas = 0.5 * np.abs(v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0])
        probs = cone_areas / cone_areas.sum()
        edge = rng.choice(len(v), size=n, p=probs)
        t = rng.uniform(size=n)[:, None]
        return v[edge] * (1 - t) + nxt[edge] * t
    raise UnsupportedVariant(f"no cone-measure sampler for {body.variant}")


# ---------------------------------------------------------------------------
# Moments, isotropization and related checks


@dataclass(frozen=True)
class MatrixEstimate:
    value: np.ndarray
    std_error: np.ndarray
    n_samples: int
    seed: int

    def max_deviation_sigmas(self, target):
        dev = np.abs(self.value - target)
        return float(np.max(dev / np.maximum(self.std_error, 1e-300)))


def _draw(mu, n_samples, seed):
    from .sampling import SamplerConfig, sample

    return sample(mu, n_samples, SamplerConfig(seed=seed))


def covariance(mu, n_samples=100_000, seed=0, samples=None) -> MatrixEstimate:
    """Sample covariance with per-entry standard errors."""
    x = _draw(mu, n_samples, seed) if samples is None else samples
    xc = x - x.mean(axis=0)
    n = xc.shape[0]
    prods = xc[:, :, None] * xc[:, None, :]
    cov = prods.mean(axis=0) * n / (n - 1)
    se = prods.std(axis=0, ddof=1) / np.sqrt(n)
    if np.linalg.eigvalsh(cov)[0] <= 0:
        raise SingularEstimate("sample covariance not positive definite")
    return MatrixEstimate(cov, se, n, seed)


def barycenter(mu, n_samples=100_000, seed=0, samples=None) -> MatrixEstimate:
    x = _draw(mu, n_samples, seed) if samples is None else samples
    n = x.shape[0]
    return MatrixEstimate(x.mean(axis=0), x.std(axis=0, ddof=1) / np.sqrt(n),
                          n, seed)


def isotropize(mu, n_samples=200_000, seed=0):
    """Whitening map from a dedicated sample; exact thereafter.

    Even families are centered at 0 exactly (their barycenter vanishes by
    symmetry; estimating it would only inject noise into the position).
    """
    x = _draw(mu, n_samples, seed)
    center = np.zeros(mu.dim) if mu.even else x.mean(axis=0)
    xc = x - center
    cov = xc.T @ xc / (xc.shape[0] - 1)
    lam, vec = np.linalg.eigh(cov)
    if lam[0] <= 0:
        raise SingularEstimate("sample covariance not positive definite")
    T = vec @ np.diag(lam ** -0.5) @ vec.T
    amap = AffineMap(T, center)
    return amap, AffinePushforward(mu, amap)


def isotropic_constant(mu, n_samples=100_000, seed=0, n_blocks=10):
    """L_f = ||f||_inf^(1/n) det(Cov f)^(1/2n) with a block-resampled SE."""
    from .estimate import MCEstimate

    x = _draw(mu, n_samples, seed)
    n = mu.dim
    lsup = np.log(mu.sup_density)

    def lf(block):
        xc = block - block.mean(axis=0)
        cov = xc.T @ xc / (xc.shape[0] - 1)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise SingularEstimate("covariance block not positive definite")
        return np.exp(lsup / n + logdet / (2 * n))

    value = lf(x)
    blocks = np.array_split(x, n_blocks)
    vals = np.array([lf(b) for b in blocks])
    se = float(vals.std(ddof=1) / np.sqrt(n_blocks))
    return MCEstimate(float(value), se, x.shape[0], seed)


def fradelizi_check(mu, n_samples=20_000, seed=0):
    """ratio = ||f||_inf / f(0) against the centered-density bound e^n."""
    if mu.even:
        ratio = 1.0
    else:
        bar = barycenter(mu, n_samples, seed)
        if np.any(np.abs(bar.value) > 4 * bar.std_error + 1e-6):
            raise ValueError("fradelizi_check requires a centered density")
        x = _draw(mu, n_samples, seed)
        psi = mu.potential(x)
        x0 = x[np.argmin(psi)]
        res = optimize.minimize(lambda z: float(mu.potential(z)), x0,
                                method="Powell",
                                options={"xtol": 1e-10, "ftol": 1e-12})
        ratio = float(np.exp(mu.potential(np.zeros(mu.dim)) - res.fun))
    bound = float(np.exp(mu.dim))
    return {"ratio": ratio, "bound": bound, "bound_holds": ratio <= bound * (1 + 1e-9)}


def gradient_moment(mu, alpha, n_samples=100_000, seed=0):
    """MC estimate of int |grad psi|^(1+alpha) dmu."""
    from .sampling import SamplerConfig, mc_integral

    def obs(x):
        return np.linalg.norm(mu.grad_potential(x), axis=-1) ** (1.0 + alpha)

    return mc_integral(mu, obs, n_samples, SamplerConfig(seed=seed))


# ---------------------------------------------------------------------------
# Projections onto hyperplanes


class ProjectedDensity:
    """P_E f(y) = max over the normal line of f, for E = normal^perp.

    Points are given in E-coordinates w.r.t. an orthonormal basis of E.
    """

    def __init__(self, mu: LogConcaveDensity, normal, tol=1e-10, max_iter=200):
        normal = np.asarray(normal, dtype=float)
        self.mu = mu
        self.normal = normal / np.linalg.norm(normal)
        # Orthonormal basis of the hyperplane from a Householder-style QR.
        q, _ = np.linalg.qr(np.column_stack([self.normal,
                                             np.eye(mu.dim)[:, :-1]]))
        q = q * np.sign(q[:, 0] @ self.normal)
        self.basis = q[:, 1:]
        self.tol = tol
        self.max_iter = max_iter

    def embed(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return y @ self.basis.T

    def log_value(self, y):
        """-log P_E f at E-coordinates y: min over t of psi(x0 + t * normal)."""
        pts = self.embed(y)
        return np.array([self._line_min(p) for p in pts])

    def value(self, y):
        return np.exp(-self.log_value(y))

    def _line_min(self, x0):
        phi = lambda t: float(self.mu.potential(x0 + t * self.normal))
        a, b = _bracket_univariate_min(phi, self.max_iter)
        t, val, ok = _golden_section(phi, a, b, self.tol, self.max_iter * 4)
        if not ok:
            raise LineSearchNoConverge("projection line search stalled")
        return val


def _bracket_univariate_min(phi, max_iter=200):
    a, b = -1.0, 1.0
    fa, f0, fb = phi(a), phi(0.0), phi(b)
    it = 0
    while fa < f0 or np.isinf(fa):
        a *= 2.0
        fa = phi(a)
        it += 1
        if it > max_iter:
            raise LineSearchNoConverge("bracketing failed (left)")
        if np.isinf(fa) and abs(a) > 1e12:
            break
    it = 0
    while fb < f0 or np.isinf(fb):
        b *= 2.0
        fb = phi(b)
        it += 1
        if it > max_iter:
            raise LineSearchNoConverge("bracketing failed (right)")
        if np.isinf(fb) and abs(b) > 1e12:
            break
    return a, b


_INVPHI = (np.sqrt(5.0) - 1) / 2


def _golden_section(phi, a, b, tol, max_iter):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(max_iter):
        if b - a < tol:
            t = 0.5 * (a + b)
            return t, phi(t), True
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = phi(d)
    return 0.5 * (a + b), phi(0.5 * (a + b)), False


def projection(mu: LogConcaveDensity, normal, tol=1e-10) -> ProjectedDensity:
    return ProjectedDensity(mu, normal, tol=tol)


def marginal_1d(mu: LogConcaveDensity, xi, s_grid, t_half_width=None,
                n_quad=2001):
    """Density of <x, xi> by quadrature; n <= 3 only.

    Used to check that one-dimensional marginals of isotropic families have
    sup at most 1.
    """
    if mu.dim > 3:
        raise UnsupportedVariant("quadrature marginal limited to n <= 3")
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    proj = ProjectedDensity(mu, xi)  # basis of xi^perp
    B = proj.basis
    if t_half_width is None:
        t_half_width = 12.0 * np.sqrt(mu.dim)
    if mu.dim == 1:
        return mu.density(np.asarray(s_grid, float)[:, None])
    t = np.linspace(-t_half_width, t_half_width, n_quad)
    out = np.empty(len(s_grid))
    if mu.dim == 2:
        for i, s in enumerate(s_grid):
            pts = s * xi[None, :] + t[:, None] * B[:, 0][None, :]
            out[i] = integrate.simpson(mu.density(pts), x=t)
        return out
    t2, t3 = np.meshgrid(t, t, indexing="ij")
    for i, s in enumerate(s_grid):
        pts = (s * xi[None, :] + t2.reshape(-1, 1) * B[:, 0][None, :]
               + t3.reshape(-1, 1) * B[:, 1][None, :])
        vals = mu.density(pts).reshape(t2.shape)
        out[i] = integrate.simpson(integrate.simpson(vals, x=t), x=t)
    return out
