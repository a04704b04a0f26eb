"""Short-time Fourier transform and Gabor frame machinery.

The STFT follows V_g f(x, eta) = <f, M_eta T_x g>; on the grid this is the
discrete Fourier transform of f * conj(T_x g) evaluated at the frequency
nodes, so one FFT per x node computes a full frequency column.

Gabor systems live on separable lattices alpha*Z^d x beta*Z^d with alpha a
multiple of dx and beta a multiple of deta.  Modulations are exactly
periodic modulo 2*Nyquist on the grid, so the default frequency index range
is one full period; the space range covers the box plus a margin chosen by
an atom-mass rule.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import numpy as np

from .grid import (
    Array,
    GridAlignmentError,
    GridSpec,
    Signal,
    Generator,
    gaussian_generator,
    fourier_transform,
    inner_product,
    inverse_fourier,
    lp_norm,
    modulate,
    translate,
    _alternating_phase,
)


class NotAFrameError(RuntimeError):
    """Gabor system rejected: unbounded condition or diverging iteration."""


@dataclass
class Window:
    """Analysis/synthesis window with its cached L^2 norm."""

    signal: Signal
    l2_norm: float

    @classmethod
    def from_signal(cls, sig: Signal, normalize: bool = True) -> "Window":
        nrm = lp_norm(sig, 2)
        if nrm == 0:
            raise ValueError("window must be non-zero")
        if normalize:
            sig = Signal(sig.grid, sig.samples / nrm, sig.generator)
            nrm = 1.0
        return cls(signal=sig, l2_norm=nrm)

    @classmethod
    def gaussian(cls, grid: GridSpec, width: float = 1.0) -> "Window":
        return cls.from_signal(Signal.from_generator(grid, gaussian_generator(width, grid.dim)))

    @property
    def grid(self) -> GridSpec:
        return self.signal.grid

    @property
    def window_id(self) -> str:
        gen = self.signal.generator
        if gen is None:
            return "custom"
        return f"{gen.name}{tuple(sorted(gen.params.items()))}"


def default_window(grid: GridSpec) -> Window:
    """Unit-width Gaussian on roomy boxes, box-scaled on small ones."""
    return Window.gaussian(grid, width=min(1.0, grid.half_width / 4.0))


@dataclass
class StftData:
    """Sampled V_g f over (x nodes x frequency nodes).

    values has shape (x nodes per axis, ...) + grid.shape; the x nodes may be
    strided (every x_stride-th grid node per axis) to bound memory, with the
    Riemann measure downstream scaled accordingly.
    """

    grid: GridSpec
    window_id: str
    values: Array
    x_stride: int = 1

    @property
    def x_axis_indices(self) -> Array:
        return np.arange(0, self.grid.samples_per_axis, self.x_stride)


def _shifted_window_1d(g: Array, s: int) -> Array:
    out = np.zeros_like(g)
    n = len(g)
    if s >= 0:
        out[s:] = g[: n - s] if s > 0 else g
    else:
        out[: n + s] = g[-s:]
    return out


def _translated_samples(w: Signal, offsets: tuple[int, ...]) -> Array:
    out = w.samples
    for ax, s in enumerate(offsets):
        if s == 0:
            continue
        out = np.roll(out, s, axis=ax)
        sl = [slice(None)] * out.ndim
        sl[ax] = slice(0, s) if s > 0 else slice(s, None)
        out = out.copy()
        out[tuple(sl)] = 0.0
    return out


def stft(f: Signal, g: Window, x_stride: int = 1) -> StftData:
    """Dense STFT, one FFT per (strided) x node."""
    if f.grid != g.grid:
        raise ValueError("signal and window must share a grid")
    gr = f.grid
    n = gr.samples_per_axis
    d = gr.dim
    ph = _alternating_phase(n, d)
    scale = gr.space_step ** d
    gs = g.signal.samples
    if d == 1:
        ms = np.arange(0, n, x_stride)
        rows = np.empty((len(ms), n), dtype=complex)
        for i, m in enumerate(ms):
            tg = _shifted_window_1d(gs, m - n // 2)
            rows[i] = f.samples * np.conj(tg)
        vals = np.fft.fftshift(np.fft.fft(rows, axis=1), axes=1) * ph * scale
        return StftData(gr, g.window_id, vals, x_stride)
    ms = np.arange(0, n, x_stride)
    out_shape = (len(ms),) * d + gr.shape
    vals = np.empty(out_shape, dtype=complex)
    for idx in product(range(len(ms)), repeat=d):
        offs = tuple(int(ms[i]) - n // 2 for i in idx)
        tg = _translated_samples(g.signal, offs)
        h = f.samples * np.conj(tg)
        vals[idx] = np.fft.fftshift(np.fft.fftn(h)) * ph * scale
    return StftData(gr, g.window_id, vals, x_stride)


def stft_direct(f: Signal, g: Window, x_stride: int = 1) -> StftData:
    """O(N^{2d}) summation reference; for tests and small grids."""
    gr = f.grid
    n = gr.samples_per_axis
    d = gr.dim
    dx = gr.space_step ** d
    pts = gr.space_points()
    fre = gr.freq_points()
    ms = np.arange(0, n, x_stride)
    shape = (len(ms),) * d + gr.shape
    vals = np.empty(shape, dtype=complex)
    fs = f.samples.ravel()
    for idx in product(range(len(ms)), repeat=d):
        offs = tuple(int(ms[i]) - n // 2 for i in idx)
        tg = _translated_samples(g.signal, offs).ravel()
        h = fs * np.conj(tg)
        col = (np.exp(-2j * np.pi * (fre @ pts.T)) @ h) * dx
        vals[idx] = col.reshape(gr.shape)
    return StftData(gr, g.window_id, vals, x_stride)


def istft(F: StftData, g: Window, boundary_tol: float = 1e-8) -> Signal:
    """Riemann-sum inversion u = sum V(x,eta) M_eta T_x g dx deta.

    Requires a unit-norm window; warns when the window carries boundary mass
    (zero-fill translations then lose reconstruction accuracy).
    """
    if abs(g.l2_norm - 1.0) > 1e-8:
        raise ValueError("istft needs a window normalised to unit L^2 norm")
    gr = g.grid
    n = gr.samples_per_axis
    d = gr.dim
    edge = np.abs(gr.space_axis()) > 0.9 * gr.half_width
    mask = np.zeros(gr.shape, dtype=bool)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = n
        mask |= edge.reshape(shape)
    gmass = np.abs(g.signal.samples) ** 2
    bmass = float(np.sum(gmass[mask])) / float(np.sum(gmass))
    if bmass > boundary_tol:
        warnings.warn(f"window boundary mass {bmass:.2e} exceeds {boundary_tol:.0e}")
    ph = _alternating_phase(n, d)
    scale = gr.space_step ** d
    gs = g.signal.samples
    if d == 1:
        ms = np.arange(0, n, F.x_stride)
        syn = np.fft.ifft(np.fft.ifftshift(F.values * ph, axes=1), axis=1) / gr.space_step
        acc = np.zeros(n, dtype=complex)
        for i, m in enumerate(ms):
            tg = _shifted_window_1d(gs, m - n // 2)
            acc += syn[i] * tg
        return Signal(gr, acc * scale * F.x_stride)
    ms = np.arange(0, n, F.x_stride)
    acc = np.zeros(gr.shape, dtype=complex)
    for idx in product(range(len(ms)), repeat=d):
        offs = tuple(int(ms[i]) - n // 2 for i in idx)
        tg = _translated_samples(g.signal, offs)
        piece = np.fft.ifftn(np.fft.ifftshift(F.values[idx] * ph)) / gr.space_step ** d
        acc += piece * tg
    return Signal(gr, acc * scale * F.x_stride ** d)


# ---------------------------------------------------------------------------
# Lattices and frame operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaborLattice:
    """Separable lattice alpha Z^d x beta Z^d with explicit index ranges."""

    grid: GridSpec
    alpha: float
    beta: float
    k_index: tuple[int, ...]
    n_index: tuple[int, ...]

    def __post_init__(self):
        dx, deta = self.grid.space_step, self.grid.freq_step
        if abs(self.alpha / dx - round(self.alpha / dx)) > 1e-9:
            raise GridAlignmentError("alpha must be a multiple of the space step")
        if abs(self.beta / deta - round(self.beta / deta)) > 1e-9:
            raise GridAlignmentError("beta must be a multiple of the frequency step")

    @property
    def k_step(self) -> int:
        return int(round(self.alpha / self.grid.space_step))

    @property
    def n_step(self) -> int:
        return int(round(self.beta / self.grid.freq_step))

    @property
    def k_values(self) -> Array:
        return np.asarray(self.k_index, dtype=int)

    @property
    def n_values(self) -> Array:
        return np.asarray(self.n_index, dtype=int)

    @property
    def num_atoms(self) -> int:
        return (len(self.k_index) * len(self.n_index)) ** self.grid.dim

    def k_tuples(self) -> list[tuple[int, ...]]:
        return list(product(self.k_index, repeat=self.grid.dim))

    def n_tuples(self) -> list[tuple[int, ...]]:
        return list(product(self.n_index, repeat=self.grid.dim))

    @classmethod
    def for_grid(
        cls,
        grid: GridSpec,
        alpha: float,
        beta: float,
        window: Optional[Window] = None,
        k_radius: Optional[int] = None,
        n_radius: Optional[int] = None,
        mass_tol: float = 1e-12,
    ) -> "GaborLattice":
        """Default ranges: k spans the box plus the window-mass margin, n one
        full modulation period (modulations alias with period 2*Nyquist)."""
        if k_radius is None:
            if window is not None and grid.dim == 1:
                g2 = np.abs(window.signal.samples) ** 2
                tot = float(np.sum(g2))
                k = int(np.floor(grid.half_width / alpha))
                n = grid.samples_per_axis
                while True:
                    s = int(round((k + 1) * alpha / grid.space_step))
                    if s >= n:
                        break
                    inbox = float(np.sum(g2[: n - s]))
                    if inbox < mass_tol * tot:
                        break
                    k += 1
                k_radius = k
            else:
                k_radius = int(np.floor(grid.half_width / alpha))
        k_index = tuple(range(-k_radius, k_radius + 1))
        if n_radius is None:
            period = int(round(2.0 * grid.nyquist / beta))
            n_index = tuple(range(-period // 2, period // 2))
        else:
            n_index = tuple(range(-n_radius, n_radius + 1))
        return cls(grid, float(alpha), float(beta), k_index, n_index)


@dataclass
class GaborCoeffs:
    """<f, g_{k,n}> over the lattice index box; axes (k..., n...)."""

    lattice: GaborLattice
    values: Array

    @property
    def expected_shape(self) -> tuple[int, ...]:
        d = self.lattice.grid.dim
        return (len(self.lattice.k_index),) * d + (len(self.lattice.n_index),) * d


def gabor_atom(g: Window, lat: GaborLattice, k, n) -> Signal:
    """g_{k,n} = M_{beta n} T_{alpha k} g."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    return modulate(translate(g.signal, lat.alpha * k), lat.beta * n)


def _freq_pick(lat: GaborLattice) -> Array:
    n = lat.grid.samples_per_axis
    idx = lat.n_values * lat.n_step + n // 2
    if idx.min() < 0 or idx.max() >= n:
        raise GridAlignmentError("frequency lattice exceeds the resolved band")
    return idx


def _window_table(g: Window, lat: GaborLattice) -> Array:
    """All space-translates of the window as rows (d = 1)."""
    return np.stack([
        _shifted_window_1d(g.signal.samples, k * lat.k_step) for k in lat.k_index
    ])


def gabor_analysis(f: Signal, g: Window, lat: GaborLattice) -> GaborCoeffs:
    """C_g f: one FFT per space lattice node, frequency axis subsampled."""
    gr = f.grid
    n = gr.samples_per_axis
    d = gr.dim
    ph = _alternating_phase(n, d)
    scale = gr.space_step ** d
    pick = _freq_pick(lat)
    if d == 1:
        TG = _window_table(g, lat)
        H = np.fft.fftshift(np.fft.fft(f.samples[None, :] * TG.conj(), axis=1),
                            axes=1) * ph * scale
        return GaborCoeffs(lat, H[:, pick])
    kvals = lat.k_values
    shape = (len(kvals),) * d + (len(lat.n_index),) * d
    out = np.empty(shape, dtype=complex)
    for kidx in product(range(len(kvals)), repeat=d):
        offs = tuple(int(kvals[i]) * lat.k_step for i in kidx)
        tg = _translated_samples(g.signal, offs)
        H = np.fft.fftshift(np.fft.fftn(f.samples * np.conj(tg))) * ph * scale
        sub = H
        for ax in range(d):
            sub = np.take(sub, pick, axis=ax)
        out[kidx] = sub
    return GaborCoeffs(lat, out)


def _tone_table(lat: GaborLattice) -> Array:
    x = lat.grid.space_axis()
    return np.exp(2j * np.pi * lat.beta * np.multiply.outer(
        lat.n_values.astype(float), x))


def gabor_synthesis(c: GaborCoeffs, g: Window, lat: GaborLattice) -> Signal:
    """D_g c = sum c_{k,n} M_{beta n} T_{alpha k} g."""
    gr = g.grid
    d = gr.dim
    tones = _tone_table(lat)
    if d == 1:
        TG = _window_table(g, lat)
        acc = np.sum((c.values @ tones) * TG, axis=0)
        return Signal(gr, acc)
    kvals = lat.k_values
    acc = np.zeros(gr.shape, dtype=complex)
    vals = c.values
    for kidx in product(range(len(kvals)), repeat=d):
        offs = tuple(int(kvals[i]) * lat.k_step for i in kidx)
        tg = _translated_samples(g.signal, offs)
        block = vals[kidx]  # shape (num_n,)*d
        wave = block
        for ax in range(d):
            wave = np.tensordot(wave, tones, axes=([0], [0]))
        acc += wave * tg
    return Signal(gr, acc)


def gabor_analysis_direct(f: Signal, g: Window, lat: GaborLattice) -> GaborCoeffs:
    """Atom-by-atom inner products; the summation oracle for tests."""
    d = f.grid.dim
    shape = (len(lat.k_index),) * d + (len(lat.n_index),) * d
    out = np.empty(shape, dtype=complex)
    for kidx in product(range(len(lat.k_index)), repeat=d):
        for nidx in product(range(len(lat.n_index)), repeat=d):
            k = [lat.k_index[i] for i in kidx]
            n = [lat.n_index[i] for i in nidx]
            out[kidx + nidx] = inner_product(f, gabor_atom(g, lat, k, n))
    return GaborCoeffs(lat, out)


def frame_operator(f: Signal, g: Window, lat: GaborLattice) -> Signal:
    """S_g f = D_g C_g f."""
    return gabor_synthesis(gabor_analysis(f, g, lat), g, lat)


def _fast_frame_apply(g: Window, lat: GaborLattice):
    """Precomputed-table closure for repeated S_g applications (d = 1)."""
    gr = g.grid
    if gr.dim != 1:
        return lambda v: frame_operator(Signal(gr, v), g, lat).samples
    n = gr.samples_per_axis
    ph = _alternating_phase(n, 1)
    scale = gr.space_step
    pick = _freq_pick(lat)
    TG = _window_table(g, lat)
    TGc = TG.conj()
    tones = _tone_table(lat)

    def apply(v: Array) -> Array:
        H = np.fft.fftshift(np.fft.fft(v[None, :] * TGc, axis=1), axes=1)
        C = H[:, pick] * (ph[pick] * scale)
        return np.sum((C @ tones) * TG, axis=0)

    return apply


def frame_matrix_dense(g: Window, lat: GaborLattice) -> Array:
    """Dense matrix of S_g acting on grid vectors (d=1, small N only)."""
    gr = g.grid
    if gr.dim != 1:
        raise NotImplementedError
    n = gr.samples_per_axis
    x = gr.space_axis()
    rows = []
    for k in lat.k_index:
        tg = _shifted_window_1d(g.signal.samples, k * lat.k_step)
        for nn in lat.n_index:
            rows.append(np.exp(2j * np.pi * lat.beta * nn * x) * tg)
    G = np.asarray(rows)
    # (S f)_t = sum_a G[a,t] * sum_{t'} conj(G[a,t']) f_{t'} dx
    return (G.T @ G.conj()) * gr.space_step


@dataclass
class FrameBounds:
    lower: float
    upper: float
    iterations: int
    is_frame: bool


def _power_iteration(apply_op, v0: Array, tol: float, maxiter: int):
    v = v0 / np.linalg.norm(v0.ravel())
    lam = 0.0
    for it in range(1, maxiter + 1):
        w = apply_op(v)
        new = float(np.real(np.vdot(v.ravel(), w.ravel())))
        nrm = np.linalg.norm(w.ravel())
        if nrm == 0:
            return 0.0, it
        v = w / nrm
        if it > 4 and abs(new - lam) <= tol * max(abs(new), 1e-300):
            return new, it
        lam = new
    return lam, maxiter


def frame_bounds(
    g: Window,
    lat: GaborLattice,
    tol: float = 1e-6,
    maxiter: int = 3000,
    ratio_cap: float = 1e6,
    seed: int = 7,
) -> FrameBounds:
    """Extreme eigenvalues of S_g by power iteration (upper) and shifted
    power iteration (lower); is_frame fails when upper/lower exceeds
    ratio_cap."""
    gr = g.grid
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=gr.shape) + 1j * rng.normal(size=gr.shape)
    s_apply = _fast_frame_apply(g, lat)
    upper, it1 = _power_iteration(s_apply, v0, tol, maxiter)
    mu = 1.05 * upper

    def shifted(v: Array) -> Array:
        return mu * v - s_apply(v)

    top, it2 = _power_iteration(shifted, v0, tol, maxiter)
    lower = mu - top
    is_frame = lower > 0 and upper / max(lower, 1e-300) <= ratio_cap
    return FrameBounds(lower=float(lower), upper=float(upper), iterations=it1 + it2, is_frame=is_frame)


def frame_degeneracy_check(
    alpha: float,
    beta: float,
    grids: tuple[GridSpec, ...],
    width: float = 1.0,
) -> dict:
    """Track the lower frame bound as the truncation box grows.

    The discrete system is always a finite frame; degeneracy of the
    underlying continuous system (critical-density Gaussian, Balian-Low)
    shows up as a lower bound collapsing with the box size, while a true
    frame keeps a stable positive bound.  Bounds come from the dense frame
    matrix (the summation oracle), so the verdict is insensitive to
    iteration stopping rules.  Pass grids with growing half_width; the
    fitted exponent of A against L below -1 reads as degenerate.
    """
    lows, sizes = [], []
    for gr in grids:
        if gr.size > 1024:
            raise ValueError("degeneracy check uses dense spectra; keep N <= 1024")
        w = Window.gaussian(gr, width)
        lat = GaborLattice.for_grid(gr, alpha, beta, window=w)
        spec = np.linalg.eigvalsh(frame_matrix_dense(w, lat))
        lows.append(max(float(spec[0]), 1e-300))
        sizes.append(gr.half_width)
    sizes = np.asarray(sizes)
    lows = np.asarray(lows)
    slope = float(np.polyfit(np.log(sizes), np.log(lows), 1)[0])
    return {"lower_bounds": lows.tolist(), "box_half_widths": sizes.tolist(),
            "decay_exponent": slope, "degenerate": slope < -1.0}


def _cg_solve(apply_op, b: Array, tol: float, maxiter: int):
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(np.real(np.vdot(r, r)))
    b_nrm = np.sqrt(float(np.real(np.vdot(b, b))))
    if b_nrm == 0:
        return x, 0, True
    for it in range(1, maxiter + 1):
        Ap = apply_op(p)
        alpha = rs / float(np.real(np.vdot(p, Ap)))
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = float(np.real(np.vdot(r, r)))
        if np.sqrt(rs_new) <= tol * b_nrm:
            return x, it, True
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, maxiter, False


def dual_window(g: Window, lat: GaborLattice, tol: float = 1e-10, maxiter: int = 500) -> Window:
    """Canonical dual gamma = S_g^{-1} g by conjugate gradients."""
    gr = g.grid
    fast = _fast_frame_apply(g, lat)

    def s_apply(v: Array) -> Array:
        return fast(v.reshape(gr.shape)).ravel()

    x, its, ok = _cg_solve(s_apply, g.signal.samples.ravel(), tol, maxiter)
    if not ok:
        raise NotAFrameError(
            f"conjugate gradients did not reach {tol:.0e} in {maxiter} iterations"
        )
    return Window(signal=Signal(gr, x.reshape(gr.shape)),
                  l2_norm=lp_norm(Signal(gr, x.reshape(gr.shape)), 2))


def _chebyshev_coeffs(fn: Callable[[Array], Array], degree: int) -> Array:
    k = np.arange(degree + 1)
    nodes = np.cos(np.pi * (k + 0.5) / (degree + 1))
    vals = fn(nodes)
    coeffs = np.empty(degree + 1)
    for j in range(degree + 1):
        coeffs[j] = 2.0 / (degree + 1) * np.sum(vals * np.cos(np.pi * j * (k + 0.5) / (degree + 1)))
    coeffs[0] /= 2.0
    return coeffs


def tight_window(g: Window, lat: GaborLattice, degree: int = 64,
                 bounds: Optional[FrameBounds] = None) -> Window:
    """Canonical tight window h = S_g^{-1/2} g.

    S^{-1/2} is applied through an iterative Chebyshev expansion of
    t -> t^{-1/2} on the certified spectral interval [0.95 A, 1.05 B]; the
    polynomial is evaluated by Clenshaw recurrence in the operator, so the
    cost is `degree` frame-operator applications.
    """
    fb = bounds if bounds is not None else frame_bounds(g, lat)
    if not fb.is_frame:
        raise NotAFrameError("cannot take an inverse square root of a degenerate frame operator")
    a, b = 0.95 * fb.lower, 1.05 * fb.upper
    coeffs = _chebyshev_coeffs(lambda t: ((b - a) / 2.0 * t + (b + a) / 2.0) ** -0.5, degree)
    gr = g.grid
    fast = _fast_frame_apply(g, lat)

    def t_apply(v: Array) -> Array:
        return (2.0 * fast(v) - (b + a) * v) / (b - a)

    v = g.signal.samples
    bk1 = np.zeros_like(v)
    bk2 = np.zeros_like(v)
    for c in coeffs[:0:-1]:
        bk1, bk2 = t_apply(bk1) * 2.0 - bk2 + c * v, bk1
    h = t_apply(bk1) - bk2 + coeffs[0] * v
    sig = Signal(gr, h)
    return Window(signal=sig, l2_norm=lp_norm(sig, 2))
