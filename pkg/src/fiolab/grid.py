"""Uniform truncated grids on [-L,L]^d and the discrete signal calculus.

Conventions baked into everything downstream:

* space nodes  x_m = -L + m*dx,  m = 0..N-1 per axis, dx = 2L/N
* frequency nodes  eta_k = k*deta,  k = -N/2..N/2-1 per axis, deta = 1/(2L)
* Fourier transform  fhat(eta) = integral f(t) exp(-2*pi*i*t*eta) dt,
  discretised as the dx^d-scaled DFT with the (-1)^k phase that accounts
  for the -L grid offset (exact, not an approximation of the phase).

The duality dx*deta*N = 1 makes the discrete transform unitary between the
dx-weighted and deta-weighted inner products, so Parseval holds to rounding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


class GridAlignmentError(ValueError):
    """Requested shift/lattice parameter does not sit on the grid."""


class TruncationAliasingWarning(UserWarning):
    """Significant signal mass at the box boundary or the Nyquist edge."""


@dataclass(frozen=True)
class GridSpec:
    """Truncated uniform grid on [-L, L]^d with an even number of samples."""

    dim: int
    half_width: float
    samples_per_axis: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        n = self.samples_per_axis
        if n <= 0 or n % 2 != 0:
            raise ValueError("samples_per_axis must be even and positive")

    @property
    def space_step(self) -> float:
        return 2.0 * self.half_width / self.samples_per_axis

    @property
    def freq_step(self) -> float:
        return 1.0 / (2.0 * self.half_width)

    @property
    def nyquist(self) -> float:
        # largest resolved |eta| (one-sided band edge)
        return self.samples_per_axis * self.freq_step / 2.0

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.samples_per_axis ** self.dim

    def space_axis(self) -> Array:
        n = self.samples_per_axis
        return -self.half_width + self.space_step * np.arange(n)

    def freq_axis(self) -> Array:
        n = self.samples_per_axis
        return self.freq_step * np.arange(-n // 2, n // 2)

    def space_mesh(self) -> tuple[Array, ...]:
        ax = self.space_axis()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def freq_mesh(self) -> tuple[Array, ...]:
        ax = self.freq_axis()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def space_points(self) -> Array:
        """All nodes as an array of shape (N^d, d)."""
        return np.stack([m.ravel() for m in self.space_mesh()], axis=-1)

    def freq_points(self) -> Array:
        return np.stack([m.ravel() for m in self.freq_mesh()], axis=-1)

    def offsets_for(self, x0, tol: float = 1e-9) -> tuple[int, ...]:
        """Integer per-axis sample offsets for a grid-aligned translation."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if x0.shape != (self.dim,):
            raise ValueError(f"x0 must have {self.dim} components")
        offs = x0 / self.space_step
        rounded = np.round(offs)
        if np.max(np.abs(offs - rounded)) > tol:
            raise GridAlignmentError(
                f"translation {x0} is not an integer multiple of dx={self.space_step}"
            )
        return tuple(int(r) for r in rounded)


@lru_cache(maxsize=32)
def _alternating_phase(n: int, dim: int) -> Array:
    """prod_i (-1)^{k_i} on the centred frequency index box, exact +-1."""
    k = np.arange(-n // 2, n // 2)
    one = ((-1.0) ** (np.abs(k) % 2)).astype(float)
    out = one
    for _ in range(dim - 1):
        out = np.multiply.outer(out, one)
    return out


@dataclass(frozen=True)
class Generator:
    """Analytic evaluation rule behind a Signal.

    fn takes d coordinate arrays (broadcastable) and returns complex values.
    Dilations, translations and compositions re-evaluate the rule instead of
    interpolating samples.  support/band are optional declared boxes
    (per-axis (lo, hi) tuples) for exactly compactly supported respectively
    band-limited rules.
    """

    name: str
    params: dict
    fn: Callable[..., Array]
    support: Optional[tuple[tuple[float, float], ...]] = None
    band: Optional[tuple[tuple[float, float], ...]] = None

    def __call__(self, *coords: Array) -> Array:
        return np.asarray(self.fn(*coords), dtype=complex)

    def translated(self, x0) -> "Generator":
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        base = self
        sup = None
        if base.support is not None:
            sup = tuple((lo + float(s), hi + float(s)) for (lo, hi), s in zip(base.support, x0))
        return Generator(
            name=f"translate({base.name})",
            params={**base.params, "x0": tuple(map(float, x0))},
            fn=lambda *cs: base(*[c - s for c, s in zip(cs, x0)]),
            support=sup,
            band=base.band,
        )

    def modulated(self, eta0) -> "Generator":
        eta0 = np.atleast_1d(np.asarray(eta0, dtype=float))
        base = self
        return Generator(
            name=f"modulate({base.name})",
            params={**base.params, "eta0": tuple(map(float, eta0))},
            fn=lambda *cs: np.exp(2j * np.pi * sum(e * c for e, c in zip(eta0, cs))) * base(*cs),
            support=base.support,
            band=None,
        )

    def dilated(self, lam: float) -> "Generator":
        lam = float(lam)
        base = self
        sup = None
        if base.support is not None:
            sup = tuple((lo / lam, hi / lam) for lo, hi in base.support)
        return Generator(
            name=f"dilate({base.name})",
            params={**base.params, "lam": lam},
            fn=lambda *cs: base(*[lam * c for c in cs]),
            support=sup,
            band=None,
        )

    def composed(self, maps: tuple[Callable[[Array], Array], ...], tag: str) -> "Generator":
        """Coordinate-wise substitution t_i -> maps[i](t_i)."""
        base = self
        return Generator(
            name=f"{tag}({base.name})",
            params=dict(base.params),
            fn=lambda *cs: base(*[m(c) for m, c in zip(maps, cs)]),
            support=None,
            band=base.band if all(m is None for m in maps) else None,
        )


def gaussian_generator(width: float = 1.0, dim: int = 1) -> Generator:
    """exp(-pi |t|^2 / width^2); Fourier-invariant when width = 1."""
    w2 = float(width) ** 2
    return Generator(
        name="gaussian",
        params={"width": float(width), "dim": dim},
        fn=lambda *cs: np.exp(-np.pi * sum(np.asarray(c) ** 2 for c in cs) / w2) + 0j,
    )


def _bump_profile(u: Array) -> Array:
    out = np.zeros_like(u, dtype=float)
    m = np.abs(u) < 1.0
    um = u[m]
    out[m] = np.exp(-1.0 / (1.0 - um * um))
    return out


def bump_generator(center: float = 0.5, half_width: float = 0.42, dim: int = 1) -> Generator:
    """Smooth compactly supported bump, exactly zero outside the declared box."""
    c, hw = float(center), float(half_width)
    return Generator(
        name="bump",
        params={"center": c, "half_width": hw, "dim": dim},
        fn=lambda *cs: np.prod(
            [_bump_profile((np.asarray(t) - c) / hw) for t in cs], axis=0
        ) + 0j,
        support=tuple(((c - hw, c + hw),) * dim),
    )


def bandlimited_generator(grid: "GridSpec", band_edge: float | None = None) -> Generator:
    """Sinc-type signal: inverse transform of a smooth frequency plateau.

    Evaluable at arbitrary points through its finite Fourier sum, and carries
    a declared band so compact-spectrum hypotheses can be recognised exactly.
    """
    edge = float(band_edge) if band_edge is not None else grid.nyquist / 4.0
    eta = grid.freq_axis()
    inner, outer = edge / 2.0, edge
    r = np.abs(eta)
    prof = np.zeros_like(r)
    prof[r <= inner] = 1.0
    mid = (r > inner) & (r < outer)
    u = (outer - r[mid]) / (outer - inner)
    a = np.exp(-1.0 / u)
    b = np.exp(-1.0 / (1.0 - u))
    prof[mid] = a / (a + b)
    deta = grid.freq_step
    if grid.dim != 1:
        raise NotImplementedError("bandlimited generator provided for d=1 only")

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(t, eta)) @ (prof * deta)

    return Generator(
        name="bandlimited",
        params={"band_edge": edge},
        fn=fn,
        band=((-outer, outer),),
    )


@dataclass
class Signal:
    """Complex samples on a GridSpec, optionally backed by a Generator."""

    grid: GridSpec
    samples: Array
    generator: Optional[Generator] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != self.grid.shape:
            if self.samples.size == self.grid.size:
                self.samples = self.samples.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"samples shape {self.samples.shape} does not match grid {self.grid.shape}"
                )

    @classmethod
    def from_generator(cls, grid: GridSpec, gen: Generator) -> "Signal":
        vals = gen(*grid.space_mesh())
        return cls(grid=grid, samples=vals, generator=gen)

    def copy(self) -> "Signal":
        return Signal(self.grid, self.samples.copy(), self.generator)


@dataclass(frozen=True)
class WeightSpec:
    """Product weight <x>^{s2} <eta>^{s1}; index order follows symbol orders."""

    s1: float = 0.0  # frequency exponent
    s2: float = 0.0  # space exponent

    def __call__(self, x: Array, eta: Array) -> Array:
        return self.space_factor(x) * self.freq_factor(eta)

    def space_factor(self, x: Array) -> Array:
        return bracket(x) ** self.s2

    def freq_factor(self, eta: Array) -> Array:
        return bracket(eta) ** self.s1


def bracket(z: Array) -> Array:
    """Japanese bracket <z> = (1 + |z|^2)^{1/2}, |.| over the last axis."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(1.0 + np.sum(z * z, axis=-1))


def bracket1(z: Array) -> Array:
    """Scalar-argument bracket, no axis reduction."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(1.0 + z * z)


# ---------------------------------------------------------------------------
# Fourier transform pair
# ---------------------------------------------------------------------------

_DUAL_CACHE: dict = {}


def dual_grid(g: GridSpec) -> GridSpec:
    """The frequency-side grid: half width = Nyquist band, same N.

    Fourier images live on the dual grid, so norms, translations and
    weights of transformed signals automatically use the frequency measure.
    The pairing is cached both ways, making the involution exact (no float
    drift on dual(dual(g))).  Grids with N = 4 L^2 are self-dual.
    """
    got = _DUAL_CACHE.get(g)
    if got is None:
        got = GridSpec(g.dim, g.samples_per_axis * g.freq_step / 2.0,
                       g.samples_per_axis)
        _DUAL_CACHE[g] = got
        _DUAL_CACHE.setdefault(got, g)
    return got


def fourier_transform(f: Signal) -> Signal:
    """fhat on the centred frequency grid; exact quadrature of the node sum."""
    g = f.grid
    ph = _alternating_phase(g.samples_per_axis, g.dim)
    vals = np.fft.fftshift(np.fft.fftn(f.samples)) * ph * g.space_step ** g.dim
    return Signal(dual_grid(g), vals)


def inverse_fourier(F: Signal) -> Signal:
    """Inverse of fourier_transform; input lives on the frequency-side grid."""
    g = F.grid
    n = g.samples_per_axis
    ph = _alternating_phase(n, g.dim)
    vals = np.fft.ifftn(np.fft.ifftshift(F.samples * ph)) * (n * g.space_step) ** g.dim
    return Signal(dual_grid(g), vals)


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

def translate(f: Signal, x0) -> Signal:
    """T_{x0} f(t) = f(t - x0), zero fill at the boundary; x0 grid-aligned."""
    offs = f.grid.offsets_for(x0)
    out = f.samples
    for ax, s in enumerate(offs):
        if s == 0:
            continue
        out = np.roll(out, s, axis=ax)
        sl = [slice(None)] * out.ndim
        sl[ax] = slice(0, s) if s > 0 else slice(s, None)
        out = out.copy()
        out[tuple(sl)] = 0.0
    gen = f.generator.translated(x0) if f.generator is not None else None
    return Signal(f.grid, out, gen)


def modulate(f: Signal, eta0) -> Signal:
    """M_{eta0} f(t) = exp(2*pi*i*eta0.t) f(t); eta0 unrestricted."""
    eta0 = np.atleast_1d(np.asarray(eta0, dtype=float))
    if eta0.shape != (f.grid.dim,):
        raise ValueError(f"eta0 must have {f.grid.dim} components")
    mesh = f.grid.space_mesh()
    phase = np.exp(2j * np.pi * sum(e * m for e, m in zip(eta0, mesh)))
    gen = f.generator.modulated(eta0) if f.generator is not None else None
    return Signal(f.grid, f.samples * phase, gen)


def _boundary_mass_ratio(samples: Array, grid: GridSpec, frac: float = 0.9) -> float:
    ax = np.abs(grid.space_axis())
    edge = ax > frac * grid.half_width
    mask = np.zeros(grid.shape, dtype=bool)
    for d in range(grid.dim):
        sl = [None] * grid.dim
        sl[d] = slice(None)
        mask |= edge[tuple(sl)]
    tot = float(np.sum(np.abs(samples) ** 2))
    if tot == 0.0:
        return 0.0
    return float(np.sum(np.abs(samples[mask]) ** 2)) / tot


def _freq_edge_ratio(fhat: Array, grid: GridSpec, frac: float) -> float:
    ax = np.abs(grid.freq_axis())
    edge = ax > frac * grid.nyquist
    mask = np.zeros(grid.shape, dtype=bool)
    for d in range(grid.dim):
        sl = [None] * grid.dim
        sl[d] = slice(None)
        mask |= edge[tuple(sl)]
    tot = float(np.sum(np.abs(fhat) ** 2))
    if tot == 0.0:
        return 0.0
    return float(np.sum(np.abs(fhat[mask]) ** 2)) / tot


def dilate(f: Signal, lam: float, warn_tol: float = 1e-8) -> Signal:
    """U_lam f(x) = f(lam x).

    Generator-backed signals are re-evaluated analytically (no interpolation
    error).  Sample-only signals support integer lam by re-indexing and, for
    d = 1, arbitrary lam > 0 through band-limited trigonometric resampling.
    Emits TruncationAliasingWarning when the result carries more than
    warn_tol of its mass near the box boundary or the Nyquist edge.
    """
    lam = float(lam)
    if lam <= 0:
        raise ValueError("dilation parameter must be positive")
    g = f.grid
    if f.generator is not None:
        out = Signal.from_generator(g, f.generator.dilated(lam))
    elif lam == 1.0:
        out = f.copy()
    elif abs(lam - round(lam)) < 1e-12:
        m = int(round(lam))
        n = g.samples_per_axis
        idx = m * (np.arange(n) - n // 2) + n // 2
        valid = (idx >= 0) & (idx < n)
        vals = f.samples
        for ax in range(g.dim):
            take = np.where(valid, np.clip(idx, 0, n - 1), 0)
            vals = np.take(vals, take, axis=ax)
            shape = [1] * g.dim
            shape[ax] = n
            vals = vals * valid.reshape(shape)
        out = Signal(g, vals)
    elif g.dim == 1:
        fhat = fourier_transform(f)
        pts = lam * g.space_axis()
        kernel = np.exp(2j * np.pi * np.multiply.outer(pts, g.freq_axis()))
        vals = kernel @ (fhat.samples * g.freq_step)
        inside = np.abs(pts) <= g.half_width
        vals = np.where(inside, vals, 0.0)
        out = Signal(g, vals)
    else:
        raise NotImplementedError(
            "non-integer dilation of sample-only signals is implemented for d=1"
        )
    br = _boundary_mass_ratio(out.samples, g)
    if br > warn_tol:
        warnings.warn(
            f"dilate(lam={lam}): boundary mass ratio {br:.2e} exceeds {warn_tol:.0e}",
            TruncationAliasingWarning,
        )
    fr = _freq_edge_ratio(fourier_transform(out).samples, g, 0.95)
    if fr > warn_tol:
        warnings.warn(
            f"dilate(lam={lam}): Nyquist-edge mass ratio {fr:.2e} exceeds {warn_tol:.0e}",
            TruncationAliasingWarning,
        )
    return out


def lp_norm(f: Signal, p: float) -> float:
    """Riemann-sum L^p norm, sup norm for p = inf."""
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max())
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    dx = f.grid.space_step ** f.grid.dim
    return float((np.sum(a ** p) * dx) ** (1.0 / p))


def inner_product(f: Signal, g: Signal) -> complex:
    """<f, g> = sum f conj(g) dx^d (sesquilinear, conjugate on the right)."""
    if f.grid != g.grid:
        raise ValueError("signals live on different grids")
    dx = f.grid.space_step ** f.grid.dim
    return complex(np.vdot(g.samples, f.samples) * dx)


def weighted_multiply(f: Signal, weight: Callable[..., Array]) -> Signal:
    """Pointwise multiply by weight(x1, ..., xd) evaluated on the grid."""
    w = np.asarray(weight(*f.grid.space_mesh()))
    return Signal(f.grid, f.samples * w)


def random_schwartz_signal(grid: GridSpec, rng: np.random.Generator) -> Signal:
    """Random well-concentrated test signal (Gaussian envelope, mild chirp)."""
    L = grid.half_width
    mesh = grid.space_mesh()
    width = float(rng.uniform(0.5, 1.5)) * min(1.0, L / 8.0) + 0.2 * min(1.0, L / 8.0)
    center = rng.uniform(-L / 8.0, L / 8.0, size=grid.dim)
    freq = rng.uniform(-grid.nyquist / 8.0, grid.nyquist / 8.0, size=grid.dim)
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    phase = sum(2j * np.pi * fq * m for fq, m in zip(freq, mesh))
    amp = rng.normal() + 1j * rng.normal()
    poly = 1.0 + 0.5 * rng.normal() * sum(m - c for m, c in zip(mesh, center))
    return Signal(grid, amp * poly * np.exp(-np.pi * r2 / width ** 2 + phase))


def default_grid(dim: int = 1) -> GridSpec:
    """Desk-scale defaults: d=1 -> L=16, N=1024; d=2 -> L=8, N=128."""
    if dim == 1:
        return GridSpec(1, 16.0, 1024)
    if dim == 2:
        return GridSpec(2, 8.0, 128)
    raise ValueError("only d in {1,2} has a bundled default")
