"""Complex-amplitude calculus on the phase plane.

The phase plane is parametrized by alpha = x + i*p with measure
d^2alpha = dx dp.  The Fourier convention used by every other module is
fixed here once:

    forward:   F(beta)  = Int d^2alpha f(alpha) exp(beta*conj(alpha) - conj(beta)*alpha)
    inverse:   f(alpha) = (1/pi^2) Int d^2beta F(beta) exp(conj(beta)*alpha - beta*conj(alpha))

In real coordinates the forward kernel is exp(i*2*Im(beta)*x) * exp(-i*2*Re(beta)*p).
Modules must import these transforms rather than re-deriving the signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    NonConvergenceError,
    ParameterError,
    RangeError,
    ResolutionError,
    TruncationError,
)

SQRT_PI = math.sqrt(math.pi)

ComplexArray = np.ndarray
FieldEvaluator = Callable[[ComplexArray], ComplexArray]


# ---------------------------------------------------------------------------
# points, grids, fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """A point alpha = x + i*p of the phase plane (dimensionless quadratures)."""

    x: float
    p: float

    @property
    def alpha(self) -> complex:
        return complex(self.x, self.p)

    @classmethod
    def from_alpha(cls, alpha: complex) -> "PhasePoint":
        alpha = complex(alpha)
        return cls(alpha.real, alpha.imag)


def as_complex(value) -> ComplexArray | complex:
    """Coerce a PhasePoint, scalar or array to complex."""
    if isinstance(value, PhasePoint):
        return value.alpha
    return np.asarray(value, dtype=complex) if isinstance(value, np.ndarray) else complex(value)


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform Cartesian grid, symmetric about the origin.

    With odd ``resolution`` the origin is a grid node.  The default covers
    |alpha| <= 6 and resolves Gaussian densities with width >= 0.05.
    """

    extent: float = 6.0
    resolution: int = 257

    def __post_init__(self):
        if self.extent <= 0:
            raise ParameterError("grid extent must be positive")
        if self.resolution < 2:
            raise ParameterError("grid resolution must be at least 2")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.resolution - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.resolution)

    def mesh(self) -> ComplexArray:
        """Complex nodes alpha[i, j] = x_i + i*p_j (row-major in x)."""
        ax = self.axis()
        x, p = np.meshgrid(ax, ax, indexing="ij")
        return x + 1j * p

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.resolution, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def nyquist(self) -> float:
        """Largest |2*beta| component representable without aliasing."""
        return math.pi / self.spacing


@dataclass
class PhaseField:
    """A complex-valued function over the phase plane (alpha or beta side).

    Either a closed-form vectorized evaluator, a sampled array over a grid,
    or both.  When both exist they agree at the nodes by construction.
    """

    side: str  # "alpha" | "beta"
    fn: FieldEvaluator | None = None
    grid: PhaseGrid | None = None
    values: np.ndarray | None = None
    delta_at_origin: bool = False
    imag_residue: float = 0.0

    def __post_init__(self):
        if self.side not in ("alpha", "beta"):
            raise ParameterError("field side must be 'alpha' or 'beta'")
        if self.fn is None and self.values is None and not self.delta_at_origin:
            raise ParameterError("field needs an evaluator, samples, or the delta tag")
        if self.values is not None and self.grid is None:
            raise ParameterError("sampled field needs its grid")

    def __call__(self, points) -> ComplexArray | complex:
        if self.fn is None:
            raise ParameterError("field has no closed-form evaluator")
        z = as_complex(points)
        if np.isscalar(z) or isinstance(z, complex):
            return complex(self.fn(np.asarray([z]))[0])
        return self.fn(np.asarray(z, dtype=complex))

    def sampled_on(self, grid: PhaseGrid) -> np.ndarray:
        if self.values is not None and self.grid == grid:
            return self.values
        if self.fn is None:
            raise ParameterError("cannot resample a purely sampled field on a new grid")
        return self.fn(grid.mesh())


def delta_field() -> PhaseField:
    """The unit point mass at the origin, usable as a transform input."""
    return PhaseField(side="alpha", fn=None, delta_at_origin=True)


# ---------------------------------------------------------------------------
# Gauss-Legendre helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_nodes_1d(a: float, b: float, n: int):
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def gauss_integrate_1d(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = 64):
    x, w = gauss_nodes_1d(a, b, n)
    return np.sum(w * f(x))


def gauss_panels_1d(f, edges: Sequence[float], n: int = 32):
    """Panel-wise Gauss-Legendre integral over consecutive [edges] intervals."""
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total = total + gauss_integrate_1d(f, a, b, n)
    return total


# ---------------------------------------------------------------------------
# 2-D quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cartesian:
    """Rectangular quadrature domain x in [xmin, xmax], p in [pmin, pmax]."""

    xmin: float
    xmax: float
    pmin: float
    pmax: float

    @classmethod
    def square(cls, half_width: float) -> "Cartesian":
        return cls(-half_width, half_width, -half_width, half_width)

    @classmethod
    def from_grid(cls, grid: PhaseGrid) -> "Cartesian":
        return cls.square(grid.extent)


@dataclass(frozen=True)
class Radial:
    """Disk (or annulus-limit) domain for Int_0^R r dr Int_0^2pi dphi.

    ``r_max=None`` grows the outer radius in doubling panels until the
    integral stabilizes; failure to stabilize raises NonConvergenceError,
    the signal used elsewhere to detect divergent moments.
    """

    r_max: float | None = None
    r_start: float = 1.0
    max_radius: float = 1.0e5


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float

    @property
    def real(self) -> float:
        return self.value.real


def _tensor_gauss(f, dom: Cartesian, n: int) -> complex:
    x, wx = gauss_nodes_1d(dom.xmin, dom.xmax, n)
    p, wp = gauss_nodes_1d(dom.pmin, dom.pmax, n)
    X, P = np.meshgrid(x, p, indexing="ij")
    vals = np.asarray(f(X + 1j * P))
    return complex(np.einsum("i,ij,j->", wx, vals, wp))


def _disk_shell(f, r0: float, r1: float, n_r: int, n_phi: int) -> complex:
    r, wr = gauss_nodes_1d(r0, r1, n_r)
    phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    wphi = 2.0 * math.pi / n_phi  # periodic trapezoid
    R, PHI = np.meshgrid(r, phi, indexing="ij")
    vals = np.asarray(f(R * np.exp(1j * PHI)))
    return complex(np.sum((wr * r)[:, None] * vals) * wphi)


def quad2d(f, domain, *, tol: float = 1.0e-10, max_refine: int = 7) -> QuadResult:
    """2-D integral of a vectorized integrand f(alpha) with error estimate.

    Refines by node doubling until two consecutive levels agree within
    ``tol`` (absolute, relative to max(1, |I|)); the reported error is the
    last inter-level difference, which bounds the true error on smooth
    integrands in practice.
    """
    if isinstance(domain, PhaseGrid):
        domain = Cartesian.from_grid(domain)
    if isinstance(domain, Cartesian):
        n = 24
        prev = _tensor_gauss(f, domain, n)
        for _ in range(max_refine):
            n *= 2
            cur = _tensor_gauss(f, domain, n)
            err = abs(cur - prev)
            if err <= tol * max(1.0, abs(cur)):
                return QuadResult(cur, err)
            prev = cur
        raise NonConvergenceError(
            f"cartesian quadrature did not stabilize below {tol:g} at n={n}"
        )
    if isinstance(domain, Radial):
        return _quad_radial(f, domain, tol=tol)
    raise ParameterError(f"unknown quadrature domain {domain!r}")


def _shell_refined(f, r0, r1, tol):
    n_r, n_phi = 24, 16
    prev = _disk_shell(f, r0, r1, n_r, n_phi)
    for _ in range(7):
        n_r *= 2
        n_phi *= 2
        cur = _disk_shell(f, r0, r1, n_r, n_phi)
        err = abs(cur - prev)
        if err <= 0.25 * tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise NonConvergenceError(f"radial shell [{r0:g},{r1:g}] did not converge")


def _quad_radial(f, dom: Radial, *, tol: float) -> QuadResult:
    if dom.r_max is not None:
        edges = [0.0]
        r = min(dom.r_start, dom.r_max)
        while edges[-1] < dom.r_max:
            edges.append(min(r, dom.r_max))
            r *= 2.0
        total, err = 0.0 + 0.0j, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = _shell_refined(f, a, b, tol)
            total += v
            err += e
        return QuadResult(total, err)

    # open domain: grow dyadic shells until two consecutive tails are negligible
    total, err = 0.0 + 0.0j, 0.0
    r0, r1 = 0.0, dom.r_start
    quiet = 0
    while r1 <= dom.max_radius:
        v, e = _shell_refined(f, r0, r1, tol)
        total += v
        err += e
        if abs(v) <= 0.5 * tol * max(1.0, abs(total)):
            quiet += 1
            if quiet >= 2:
                return QuadResult(total, err + abs(v))
        else:
            quiet = 0
        r0, r1 = r1, 2.0 * r1
    raise NonConvergenceError(
        "radial quadrature tail did not stabilize; integral may diverge"
    )


# ---------------------------------------------------------------------------
# Fourier transforms (direct quadrature; the contract, FFT is optional)
# ---------------------------------------------------------------------------

def _boundary_max(values: np.ndarray) -> float:
    return float(max(np.abs(values[0, :]).max(), np.abs(values[-1, :]).max(),
                     np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max()))


def _transform_eval(samples, grid: PhaseGrid, prefactor: float):
    """Scattered-target transform evaluator over trapezoid-weighted samples.

    Both transform directions share the kernel exp(2i Im(t) u - 2i Re(t) v)
    with t the target and (u, v) the sampled plane; they differ only in the
    1/pi^2 prefactor of the inverse.
    """
    ax = grid.axis()
    w = grid.trapezoid_weights()
    wx_vals = samples * w[:, None] * w[None, :]
    nyq = grid.nyquist

    def evaluate(targets: ComplexArray) -> ComplexArray:
        t = np.asarray(targets, dtype=complex)
        flat = t.ravel()
        if np.any(2.0 * np.abs(flat.real) > nyq) or np.any(2.0 * np.abs(flat.imag) > nyq):
            raise ResolutionError(
                f"requested frequency exceeds the grid Nyquist band |2 Re/Im| <= {nyq:g}"
            )
        out = np.empty(flat.shape, dtype=complex)
        chunk = 2048
        for i0 in range(0, flat.size, chunk):
            b = flat[i0:i0 + chunk]
            ph_x = np.exp(2j * np.outer(b.imag, ax))      # (m, nx)
            ph_p = np.exp(-2j * np.outer(b.real, ax))     # (m, np)
            out[i0:i0 + chunk] = np.einsum("mi,ij,mj->m", ph_x, wx_vals, ph_p)
        return prefactor * out.reshape(t.shape)

    return evaluate


def _transform_grid(samples, grid: PhaseGrid, prefactor: float,
                    out_grid: PhaseGrid) -> np.ndarray:
    ax = grid.axis()
    w = grid.trapezoid_weights()
    wx_vals = samples * w[:, None] * w[None, :]
    if 2.0 * out_grid.extent > grid.nyquist:
        raise ResolutionError("output grid exceeds the Nyquist band of the input grid")
    bt = out_grid.axis()
    A = np.exp(2j * np.outer(bt, ax))    # (n_tp, nu): pairs Im(target) with u
    B = np.exp(-2j * np.outer(ax, bt))   # (nv, n_tx)
    out = A @ wx_vals @ B                              # indexed [bp, bx]
    return prefactor * out.T                           # [bx, bp], row-major in Re(beta)


def _prepare_samples(f: PhaseField, grid: PhaseGrid | None, tol: float):
    g = grid or f.grid or PhaseGrid()
    vals = f.sampled_on(g)
    bmax = _boundary_max(np.asarray(vals))
    if bmax > tol:
        raise TruncationError(
            f"integrand magnitude {bmax:.3e} at the grid boundary exceeds {tol:g}; "
            "enlarge the extent"
        )
    return np.asarray(vals, dtype=complex), g


def fourier_forward(f: PhaseField, *, grid: PhaseGrid | None = None,
                    out_grid: PhaseGrid | None = None,
                    boundary_tol: float = 1.0e-10) -> PhaseField:
    """Forward transform of an alpha-side field to the beta side."""
    if f.side != "alpha":
        raise ParameterError("fourier_forward expects an alpha-side field")
    if f.delta_at_origin:
        one = lambda b: np.ones_like(np.asarray(b, dtype=complex))
        out = PhaseField(side="beta", fn=one, grid=out_grid)
        if out_grid is not None:
            out.values = one(out_grid.mesh())
        return out
    samples, g = _prepare_samples(f, grid, boundary_tol)
    fn = _transform_eval(samples, g, prefactor=1.0)
    out = PhaseField(side="beta", fn=fn)
    if out_grid is not None:
        out.grid = out_grid
        out.values = _transform_grid(samples, g, 1.0, out_grid)
    return out


def fourier_inverse(f: PhaseField, *, grid: PhaseGrid | None = None,
                    out_grid: PhaseGrid | None = None,
                    boundary_tol: float = 1.0e-10) -> PhaseField:
    """Inverse transform of a beta-side field back to the alpha side."""
    if f.side != "beta":
        raise ParameterError("fourier_inverse expects a beta-side field")
    samples, g = _prepare_samples(f, grid, boundary_tol)
    pref = 1.0 / math.pi**2
    fn = _transform_eval(samples, g, prefactor=pref)
    out = PhaseField(side="alpha", fn=fn)
    if out_grid is not None:
        out.grid = out_grid
        out.values = _transform_grid(samples, g, pref, out_grid)
    return out


# ---------------------------------------------------------------------------
# Wirtinger derivatives from closed-form quadrature partials
# ---------------------------------------------------------------------------

def wirtinger_from_xp(df_dx, df_dp):
    """Combine exact x/p partial derivatives into (d/d_alpha, d/d_alpha*).

    d/d_alpha = (d_x - i d_p)/2 and d/d_alpha* = (d_x + i d_p)/2; exact when
    the supplied partials are closed forms.
    """
    d_alpha = 0.5 * (np.asarray(df_dx) - 1j * np.asarray(df_dp))
    d_alpha_star = 0.5 * (np.asarray(df_dx) + 1j * np.asarray(df_dp))
    return d_alpha, d_alpha_star


# ---------------------------------------------------------------------------
# complex error function
# ---------------------------------------------------------------------------

#: Documented stable range of erf_complex / erfcx_complex.
ERF_STABLE_RANGE = 25.0

#: Branch boundaries (implementation-chosen, covered by cross-branch tests):
#: Maclaurin series for |z| <= _ERF_SERIES_RADIUS, Laplace continued fraction
#: for Re z >= _ERF_CF_MIN_RE inside the annulus, vertical-path quadrature in
#: the remaining near-imaginary strip, asymptotic series for |z| >= _ERF_ASYMPT.
_ERF_SERIES_RADIUS = 3.25
_ERF_ASYMPT = 6.0
_ERF_CF_MIN_RE = 2.0


def _erf_series(z: complex) -> complex:
    # (2/sqrt(pi)) sum (-1)^n z^(2n+1) / (n! (2n+1))
    u = 1.0 + 0.0j
    total = 1.0 + 0.0j
    zz = z * z
    for n in range(1, 400):
        u *= -zz / n
        term = u / (2 * n + 1)
        total += term
        if abs(term) <= 1.0e-18 * abs(total):
            break
    return (2.0 / SQRT_PI) * z * total


def _erfcx_cf(z: complex, max_iter: int = 500) -> complex:
    # Laplace continued fraction for exp(z^2) erfc(z), Re z > 0 (Lentz).
    tiny = 1.0e-300
    f = z if z != 0 else tiny
    c, d = f, 0.0 + 0.0j
    for k in range(1, max_iter):
        a = 0.5 * k
        d = z + a * d
        if d == 0:
            d = tiny
        c = z + a / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1.0e-16:
            break
    return 1.0 / (SQRT_PI * f)


def _erfcx_asympt(z: complex) -> complex:
    # 1/(z sqrt(pi)) * sum (-1)^k (2k-1)!! / (2 z^2)^k, truncated at the
    # smallest term; relative error ~ exp(-|z|^2), negligible for |z| >= 6.
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    inv2zz = 1.0 / (2.0 * z * z)
    prev = abs(term)
    for k in range(1, 60):
        term *= -(2 * k - 1) * inv2zz
        if abs(term) >= prev:
            break
        s += term
        prev = abs(term)
        if prev < 1.0e-18:
            break
    return s / (z * SQRT_PI)


def _erf_strip_quad(z: complex) -> complex:
    # erf(x + iy) = erf(x) + (2i/sqrt(pi)) Int_0^y exp(-(x+is)^2) ds for the
    # near-imaginary annulus where neither series nor CF is reliable.
    x, y = z.real, z.imag
    base = _erf_series(complex(x))
    n_panels = max(1, int(math.ceil(abs(y) / 0.5)))
    edges = np.linspace(0.0, y, n_panels + 1)
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        s, w = gauss_nodes_1d(a, b, 32)
        total += np.sum(w * np.exp(-((x + 1j * s) ** 2)))
    return base + (2j / SQRT_PI) * total


def _erf_first_quadrant(z: complex) -> complex:
    r = abs(z)
    if r <= _ERF_SERIES_RADIUS:
        return _erf_series(z)
    if r >= _ERF_ASYMPT:
        return 1.0 - np.exp(-z * z) * _erfcx_asympt(z)
    if z.real >= _ERF_CF_MIN_RE:
        return 1.0 - np.exp(-z * z) * _erfcx_cf(z)
    return _erf_strip_quad(z)


def _erf_scalar(z: complex) -> complex:
    if abs(z) > ERF_STABLE_RANGE:
        raise RangeError(f"erf_complex is documented for |z| <= {ERF_STABLE_RANGE}")
    # reduce to the first quadrant via erf(-z) = -erf(z), erf(conj z) = conj erf(z)
    neg = z.real < 0 or (z.real == 0 and z.imag < 0)
    if neg:
        z = -z
    conj = z.imag < 0
    if conj:
        z = z.conjugate()
    w = _erf_first_quadrant(z)
    if conj:
        w = w.conjugate()
    if neg:
        w = -w
    return w


def erf_complex(z):
    """Error function for complex arguments, stable for |z| <= 25.

    Matches the Maclaurin series for small |z| and the asymptotic /
    continued-fraction representations beyond; odd, and conjugate-symmetric.
    """
    if np.isscalar(z) or isinstance(z, complex):
        return _erf_scalar(complex(z))
    arr = np.asarray(z, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    flat = arr.ravel()
    res = out.ravel()
    for i, zi in enumerate(flat):
        res[i] = _erf_scalar(complex(zi))
    return out


def _erfcx_scalar(z: complex) -> complex:
    # no magnitude cap: the scaled function stays moderate for Re z >= 0 and
    # the asymptotic branch only improves with |z|
    if z.real < 0:
        # reflection reintroduces exp(z^2); callers needing scaled stability
        # should flip the argument themselves (see filters)
        return 2.0 * np.exp(z * z) - _erfcx_scalar(-z)
    conj = z.imag < 0
    if conj:
        z = z.conjugate()
    r = abs(z)
    if r >= _ERF_ASYMPT:
        w = _erfcx_asympt(z)
    elif z.real >= _ERF_CF_MIN_RE:
        w = _erfcx_cf(z)
    else:
        # 1 - erf has at most ~2 digits of cancellation for Re z < 2
        w = np.exp(z * z) * (1.0 - _erf_first_quadrant(z))
    return w.conjugate() if conj else w


def erfcx_complex(z):
    """Scaled complementary error function exp(z^2) erfc(z) for complex z.

    Intended for Re z >= 0, where it is uniformly of moderate size at any
    magnitude; for Re z < 0 the reflection formula is applied and may
    overflow.
    """
    if np.isscalar(z) or isinstance(z, complex):
        return _erfcx_scalar(complex(z))
    arr = np.asarray(z, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    flat = arr.ravel()
    res = out.ravel()
    for i, zi in enumerate(flat):
        res[i] = _erfcx_scalar(complex(zi))
    return out


# ---------------------------------------------------------------------------
# CSV serialization:  header "x,p,re,im", row-major over the grid
# ---------------------------------------------------------------------------

def write_field_csv(path, grid: PhaseGrid, values: np.ndarray,
                    comments: Sequence[str] = ()) -> None:
    vals = np.asarray(values, dtype=complex)
    if vals.shape != (grid.resolution, grid.resolution):
        raise ParameterError("values shape does not match the grid")
    ax = [float(x) for x in grid.axis()]
    lines = [f"# {c}" for c in comments]
    lines.append("x,p,re,im")
    for i, x in enumerate(ax):
        for j, p in enumerate(ax):
            v = complex(vals[i, j])
            lines.append(f"{x!r},{p!r},{v.real!r},{v.imag!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> tuple[PhaseGrid, np.ndarray]:
    xs, ps, res, ims = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("x,"):
                continue
            x, p, re, im = line.split(",")
            xs.append(float(x))
            ps.append(float(p))
            res.append(float(re))
            ims.append(float(im))
    n = int(round(math.sqrt(len(xs))))
    if n * n != len(xs):
        raise ParameterError("CSV does not contain a square grid")
    grid = PhaseGrid(extent=max(xs), resolution=n)
    vals = (np.asarray(res) + 1j * np.asarray(ims)).reshape(n, n)
    return grid, vals
