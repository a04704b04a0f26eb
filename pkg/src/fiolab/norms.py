"""Weighted modulation norms M^{p,q}_{s1,s2}, FL^p norms and sequence norms.

The mixed norm is inner L^p in x, outer L^q in eta:

    ||f||_{M^{p,q}_mu} = ( sum_eta ( sum_x |V_g f|^p mu^p dx )^{q/p} deta )^{1/q}

computed from the dense STFT by Riemann sums; Gabor-coefficient sequence
norms are the fast alternative and the two are cross-checked by the norm
equivalence machinery.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gabor import GaborCoeffs, GaborLattice, Window, default_window, gabor_analysis, stft
from .grid import (
    Signal,
    WeightSpec,
    bracket,
    dilate,
    fourier_transform,
    lp_norm,
)
from .util import GrowthFit, fit_loglog

Array = np.ndarray


class HypothesisError(ValueError):
    """Input does not satisfy the hypothesis of the requested check."""


@dataclass
class NormReport:
    value: float
    p: float
    q: float
    weight: WeightSpec
    method: str
    window_id: str


def _mixed_norm(vals: Array, w: Array, p: float, q: float, d: int,
                dx_eff: float, deta: float) -> float:
    a = np.abs(vals) * w
    x_axes = tuple(range(d))
    if np.isinf(p):
        inner = a.max(axis=x_axes)
    else:
        inner = (np.sum(a ** p, axis=x_axes) * dx_eff ** d) ** (1.0 / p)
    if np.isinf(q):
        return float(inner.max())
    return float((np.sum(inner ** q) * deta ** d) ** (1.0 / q))


def mod_norm(
    f: Signal,
    p: float,
    q: float | None = None,
    weight: WeightSpec = WeightSpec(),
    window: Optional[Window] = None,
    x_stride: int = 1,
) -> NormReport:
    """Dense-STFT modulation norm; q defaults to p."""
    if q is None:
        q = p
    g = window if window is not None else default_window(f.grid)
    if abs(g.l2_norm - 1.0) > 1e-8:
        raise ValueError("mod_norm expects a unit-norm window")
    data = stft(f, g, x_stride=x_stride)
    gr = f.grid
    d = gr.dim
    x_sub = gr.space_axis()[data.x_axis_indices]
    wx = bracket(x_sub[:, None]) ** weight.s2
    weta = bracket(gr.freq_axis()[:, None]) ** weight.s1
    shape_x = [1] * (2 * d)
    shape_e = [1] * (2 * d)
    w_arr = np.ones((1,) * 2 * d)
    for ax in range(d):
        shape_x = [1] * (2 * d)
        shape_x[ax] = len(x_sub)
        w_arr = w_arr * wx.reshape(shape_x)
        shape_e = [1] * (2 * d)
        shape_e[d + ax] = gr.samples_per_axis
        w_arr = w_arr * weta.reshape(shape_e)
    value = _mixed_norm(
        data.values, w_arr, p, q, d,
        gr.space_step * data.x_stride, gr.freq_step,
    )
    return NormReport(value=value, p=p, q=q, weight=weight, method="dense-stft",
                      window_id=g.window_id)


def fl_norm(f: Signal, p: float) -> float:
    """||f||_{FL^p} = ||fhat||_{L^p}."""
    return lp_norm(fourier_transform(f), p)


def seq_norm(
    c: GaborCoeffs,
    p: float,
    q: float | None = None,
    weight: WeightSpec = WeightSpec(),
) -> float:
    """Weighted mixed sequence norm, inner over k (space), outer over n."""
    if q is None:
        q = p
    lat = c.lattice
    d = lat.grid.dim
    kpos = lat.alpha * lat.k_values.astype(float)
    npos = lat.beta * lat.n_values.astype(float)
    wk = bracket(kpos[:, None]) ** weight.s2
    wn = bracket(npos[:, None]) ** weight.s1
    w_arr = np.ones((1,) * 2 * d)
    for ax in range(d):
        sh = [1] * (2 * d)
        sh[ax] = len(kpos)
        w_arr = w_arr * wk.reshape(sh)
        sh = [1] * (2 * d)
        sh[d + ax] = len(npos)
        w_arr = w_arr * wn.reshape(sh)
    a = np.abs(c.values) * w_arr
    k_axes = tuple(range(d))
    if np.isinf(p):
        inner = a.max(axis=k_axes)
    else:
        inner = np.sum(a ** p, axis=k_axes) ** (1.0 / p)
    if np.isinf(q):
        return float(inner.max())
    return float(np.sum(inner ** q) ** (1.0 / q))


@dataclass
class EquivalenceReport:
    lo: float
    hi: float
    ratios: tuple[float, ...]

    @property
    def spread(self) -> float:
        return self.hi / self.lo


def gabor_norm_equivalence_check(
    corpus: Sequence[Signal],
    p: float,
    q: float,
    weight: WeightSpec,
    g: Window,
    lat: GaborLattice,
    x_stride: int = 1,
    analysis_window: Optional[Window] = None,
) -> EquivalenceReport:
    """Ratio interval of seq_norm(C_g f) / mod_norm(f) over a corpus.

    analysis_window lets the coefficients come from a window with its
    natural normalisation (a canonical tight window has L^2 norm
    (alpha beta)^{d/2}, which is what makes the p = 2 ratio equal one) while
    the modulation norm keeps its unit-norm window.
    """
    aw = analysis_window if analysis_window is not None else g
    ratios = []
    for f in corpus:
        sn = seq_norm(gabor_analysis(f, aw, lat), p, q, weight)
        mn = mod_norm(f, p, q, weight, window=g, x_stride=x_stride).value
        ratios.append(sn / mn)
    return EquivalenceReport(lo=min(ratios), hi=max(ratios), ratios=tuple(ratios))


@dataclass
class LlocReport:
    kind: str  # "compact-support" or "band-limited"
    mod_value: float
    ref_value: float

    @property
    def ratio(self) -> float:
        return self.mod_value / self.ref_value


def lloc_check(f: Signal, p: float, q: float, window: Optional[Window] = None) -> LlocReport:
    """Compactly supported: M^{p,q} against FL^q; band-limited: against L^p.

    The hypothesis is read off the signal's generator metadata (declared
    exact support or band); signals satisfying neither are rejected.  For
    sample-only signals a 1e-10 relative mass rule on strict sub-boxes is
    applied instead.
    """
    gen = f.generator
    gr = f.grid
    if gen is not None and gen.support is not None:
        kind = "compact-support"
    elif gen is not None and gen.band is not None:
        kind = "band-limited"
    elif gen is None:
        half = gr.half_width / 2.0
        mesh = gr.space_mesh()
        inside = np.ones(gr.shape, dtype=bool)
        for m in mesh:
            inside &= np.abs(m) <= half
        tot = float(np.sum(np.abs(f.samples) ** 2))
        out_mass = float(np.sum(np.abs(f.samples[~inside]) ** 2)) / tot
        fh = fourier_transform(f)
        fmesh = gr.freq_mesh()
        finside = np.ones(gr.shape, dtype=bool)
        for m in fmesh:
            finside &= np.abs(m) <= gr.nyquist / 2.0
        ftot = float(np.sum(np.abs(fh.samples) ** 2))
        f_out = float(np.sum(np.abs(fh.samples[~finside]) ** 2)) / ftot
        if out_mass < 1e-10:
            kind = "compact-support"
        elif f_out < 1e-10:
            kind = "band-limited"
        else:
            raise HypothesisError("signal is neither compactly supported nor band-limited")
    else:
        raise HypothesisError(
            "generator declares neither exact support nor band; "
            "norm equivalence hypotheses do not apply"
        )
    mv = mod_norm(f, p, q, window=window).value
    ref = fl_norm(f, q) if kind == "compact-support" else lp_norm(f, p)
    return LlocReport(kind=kind, mod_value=mv, ref_value=ref)


def dilation_indices(p: float) -> tuple[float, float]:
    """(mu1, mu2): sharp dilation exponents with the breakpoint at p = 2."""
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    inv_pp = 1.0 - inv_p
    mu1 = -inv_pp if p <= 2 else -inv_p
    mu2 = -inv_p if p <= 2 else -inv_pp
    return mu1, mu2


def dilation_exponent_check(
    f: Signal,
    p: float,
    lams: Sequence[float],
    window: Optional[Window] = None,
    x_stride: int = 1,
) -> GrowthFit:
    """Fit of log ||U_lam f||_{M^p} against log lam over a geometric sweep.

    Callers compare the slope against d*mu1(p) (lam >= 1) or d*mu2(p)
    (lam <= 1); truncation-aliasing warnings from dilate propagate.
    """
    if f.generator is None:
        raise ValueError("dilation sweeps need a generator-backed signal")
    norms = []
    for lam in lams:
        u = dilate(f, lam)
        norms.append(mod_norm(u, p, window=window, x_stride=x_stride).value)
    return fit_loglog(list(lams), norms)
