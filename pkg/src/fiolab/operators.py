"""Operator quantizations and the Gabor-matrix toolbox.

Quantizations are dense oscillatory Riemann sums (the reference paths), with
FFT fast paths where exactness is checkable:

* Kohn-Nirenberg  p(x,D)f(x) = sum_eta exp(2 pi i x.eta) p(x,eta) fhat(eta) deta^d
* type I FIO      A f(x)     = sum_eta exp(2 pi i Phi(x,eta)) sigma fhat deta^d
* type II FIO     (Bf)^(eta) = sum_x exp(-2 pi i Phi(x,eta)) conj(sigma) f dx^d

With the grid's unitary transform pair, apply_fio2(Phi, sigma) is the exact
discrete adjoint of apply_fio1(Phi, sigma), so adjoint identities hold to
rounding rather than to quadrature accuracy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable, Optional, Sequence

import numpy as np

from .gabor import GaborLattice, Window, gabor_atom, _shifted_window_1d
from .grid import (
    Array,
    GridSpec,
    Signal,
    TruncationAliasingWarning,
    _alternating_phase,
    bracket,
    fourier_transform,
    inner_product,
    inverse_fourier,
    lp_norm,
)
from .symbols import Box, LPFamily, PhaseSpec, SymbolSpec
from .util import pmap

DEFAULT_CHUNK = 512
ACTIVE_TOL = 1e-15
ZERO_FLOOR = 1e-14


class AliasingError(RuntimeError):
    """Phase oscillation exceeds the resolvable band on the active set."""


def _active_columns(fhat: Array, tol: float = ACTIVE_TOL) -> Array:
    a = np.abs(fhat)
    m = a > tol * a.max() if a.max() > 0 else np.zeros_like(a, dtype=bool)
    return np.nonzero(m)[0]


def _osc_apply(
    kernel_phase: Callable[[Array, Array], Array],
    amplitude: Optional[Callable[[Array, Array], Array]],
    grid: GridSpec,
    coeffs: Array,
    act: Array,
    chunk: int = DEFAULT_CHUNK,
) -> Array:
    """sum_eta exp(2 pi i kernel_phase(x,eta)) amp(x,eta) coeffs(eta), chunked in x."""
    xs = grid.space_points()
    es = grid.freq_points()[act]
    c = coeffs[act]
    out = np.empty(grid.size, dtype=complex)
    for lo in range(0, grid.size, chunk):
        hi = min(lo + chunk, grid.size)
        X = xs[lo:hi, None, :]
        E = es[None, :, :]
        K = np.exp(2j * np.pi * kernel_phase(X, E))
        if amplitude is not None:
            K = K * amplitude(X, E)
        out[lo:hi] = K @ c
    return out


def _dot(x: Array, eta: Array) -> Array:
    return np.sum(np.asarray(x) * np.asarray(eta), axis=-1)


def apply_pseudo_kn(p: SymbolSpec, f: Signal, chunk: int = DEFAULT_CHUNK) -> Signal:
    """Kohn-Nirenberg quantization; separable symbols take the two-FFT path."""
    gr = f.grid
    fhat = fourier_transform(f)
    if p.separable is not None:
        a, b = p.separable
        bvals = b(gr.freq_points()).reshape(gr.shape)
        g = inverse_fourier(Signal(fhat.grid, fhat.samples * bvals))
        avals = a(gr.space_points()).reshape(gr.shape)
        return Signal(gr, avals * g.samples)
    flat = fhat.samples.ravel()
    act = _active_columns(flat)
    out = _osc_apply(_dot, lambda X, E: p(X, E), gr, flat * gr.freq_step ** gr.dim, act, chunk)
    return Signal(gr, out.reshape(gr.shape))


def apply_weyl(p: SymbolSpec, f: Signal) -> Signal:
    """Weyl quantization by the dense midpoint double sum (small grids only)."""
    gr = f.grid
    if gr.size > 512:
        raise ValueError("dense Weyl quantization is limited to N^d <= 512")
    xs = gr.space_points()
    es = gr.freq_points()
    dx = gr.space_step ** gr.dim
    deta = gr.freq_step ** gr.dim
    fv = f.samples.ravel()
    out = np.empty(gr.size, dtype=complex)
    for i, x in enumerate(xs):
        mid = (x[None, None, :] + xs[None, :, :]) / 2.0  # (1, Ny, d)
        E = es[:, None, :]                                # (Ne, 1, d)
        ker = np.exp(2j * np.pi * np.sum((x[None, None, :] - xs[None, :, :]) * E, axis=-1))
        out[i] = np.sum(ker * p(mid, E) * fv[None, :]) * dx * deta
    return Signal(gr, out.reshape(gr.shape))


def _aliasing_guard(
    phase: PhaseSpec,
    sym: Optional[SymbolSpec],
    grid: GridSpec,
    act: Array,
    coeffs: Array,
    amp_tol: float = 1e-10,
    frac: float = 0.95,
) -> None:
    """Warn when the stationary output frequency grad_x Phi exceeds the band
    on the amplitude-active part of (supp sigma) x (active input columns)."""
    es = grid.freq_points()[act]
    if len(es) == 0:
        return
    n_x = min(grid.size, 64)
    step = max(1, grid.size // n_x)
    xs = grid.space_points()[::step]
    X = xs[:, None, :]
    E = es[None, :, :]
    w = np.abs(coeffs[act])[None, :] * np.ones((len(xs), 1))
    if sym is not None:
        w = w * np.abs(sym(X, E))
    mask = w > amp_tol * (w.max() if w.max() > 0 else 1.0)
    if not np.any(mask):
        return
    gx = np.abs(np.asarray(phase.grad_x(X, E)))
    worst = float(np.max(np.where(mask[..., None], gx, 0.0)))
    if worst > frac * grid.nyquist:
        warnings.warn(
            f"stationary output frequency {worst:.1f} exceeds {frac:.2f} x Nyquist "
            f"({grid.nyquist:.1f}) on the active set",
            TruncationAliasingWarning,
        )


def apply_fio1(
    phase: PhaseSpec,
    sym: SymbolSpec,
    f: Signal,
    chunk: int = DEFAULT_CHUNK,
    guard: bool = True,
) -> Signal:
    """Type I FIO: dense oscillatory sum over the active frequency columns."""
    gr = f.grid
    fhat = fourier_transform(f).samples.ravel()
    act = _active_columns(fhat)
    if guard:
        _aliasing_guard(phase, sym, gr, act, fhat)
    out = _osc_apply(lambda X, E: phase.fn(X, E), lambda X, E: sym(X, E),
                     gr, fhat * gr.freq_step ** gr.dim, act, chunk)
    return Signal(gr, out.reshape(gr.shape))


def apply_fio2(
    phase: PhaseSpec,
    sym: SymbolSpec,
    f: Signal,
    chunk: int = DEFAULT_CHUNK,
) -> Signal:
    """Type II FIO, the exact discrete adjoint of apply_fio1(phase, sym)."""
    gr = f.grid
    fv = f.samples.ravel()
    act_x = _active_columns(fv)
    xs = gr.space_points()[act_x]
    es = gr.freq_points()
    dx = gr.space_step ** gr.dim
    ghat = np.empty(gr.size, dtype=complex)
    for lo in range(0, gr.size, chunk):
        hi = min(lo + chunk, gr.size)
        E = es[lo:hi, None, :]
        X = xs[None, :, :]
        K = np.exp(-2j * np.pi * phase.fn(X, E)) * np.conj(sym(X, E))
        ghat[lo:hi] = K @ (fv[act_x] * dx)
    from .grid import dual_grid
    return inverse_fourier(Signal(dual_grid(gr), ghat.reshape(gr.shape)))


@dataclass
class OperatorHandle:
    """A quantized operator applicable to signals.

    kind is one of pseudo_kn, pseudo_weyl, fio_type1, fio_type2.  FIO kinds
    require a phase passing the non-degeneracy and growth validators on the
    grid's box (coarsely sampled at construction; pass validate_phase=False
    for phases already certified elsewhere).
    """

    kind: str
    symbol: SymbolSpec
    phase: Optional[PhaseSpec]
    grid: GridSpec
    validate_phase: bool = True

    def __post_init__(self):
        if self.kind in ("fio_type1", "fio_type2"):
            if self.phase is None:
                raise ValueError("FIO kinds require a phase")
            if self.validate_phase:
                from .symbols import Box, growth_validate, nondeg_validate
                box = Box.for_grid(self.grid)
                nd = nondeg_validate(self.phase, box, samples=17)
                gw = growth_validate(self.phase, box, samples=17)
                if not (nd.passed and gw.passed):
                    raise ValueError(
                        f"phase fails validation: delta_min={nd.delta_min:.3g}, "
                        f"growth ratios=({gw.min_ratio_x:.3g}, {gw.min_ratio_eta:.3g})"
                    )

    @property
    def operator_id(self) -> str:
        ph = "none" if self.phase is None else (
            f"{self.phase.name}{tuple(sorted(self.phase.params.items()))}")
        return f"{self.kind}:{self.symbol.name}{tuple(sorted(self.symbol.params.items()))}:{ph}"

    def apply(self, f: Signal, guard: bool = True) -> Signal:
        if self.kind == "pseudo_kn":
            return apply_pseudo_kn(self.symbol, f)
        if self.kind == "pseudo_weyl":
            return apply_weyl(self.symbol, f)
        if self.kind == "fio_type1":
            return apply_fio1(self.phase, self.symbol, f, guard=guard)
        if self.kind == "fio_type2":
            return apply_fio2(self.phase, self.symbol, f)
        raise ValueError(f"unknown kind {self.kind}")

    def adjoint_apply(self, f: Signal) -> Signal:
        if self.kind == "fio_type1":
            return apply_fio2(self.phase, self.symbol, f)
        if self.kind == "fio_type2":
            return apply_fio1(self.phase, self.symbol, f, guard=False)
        if self.kind == "pseudo_kn":
            linear = _linear_phase(self.grid.dim)
            return apply_fio2(linear, self.symbol, f)
        if self.kind == "pseudo_weyl":
            conj_sym = SymbolSpec(
                name=f"conj({self.symbol.name})", order=self.symbol.order,
                fn=lambda x, eta: np.conj(self.symbol(x, eta)),
            )
            return apply_weyl(conj_sym, f)
        raise ValueError(f"unknown kind {self.kind}")


def _linear_phase(dim: int) -> PhaseSpec:
    def hess(x, eta):
        shp = np.broadcast(np.asarray(x)[..., 0], np.asarray(eta)[..., 0]).shape
        out = np.zeros(shp + (dim, dim))
        for i in range(dim):
            out[..., i, i] = 1.0
        return out

    return PhaseSpec(
        name="dot", fn=_dot,
        grad_x=lambda x, eta: np.broadcast_to(np.asarray(eta, dtype=float),
                                              np.broadcast(np.asarray(x), np.asarray(eta)).shape).copy(),
        grad_eta=lambda x, eta: np.broadcast_to(np.asarray(x, dtype=float),
                                                np.broadcast(np.asarray(x), np.asarray(eta)).shape).copy(),
        mixed_hessian=hess,
    )


# ---------------------------------------------------------------------------
# Structural identities
# ---------------------------------------------------------------------------

def _transposed_phase(phase: PhaseSpec) -> PhaseSpec:
    return PhaseSpec(
        name=f"t({phase.name})",
        fn=lambda x, eta: phase.fn(eta, x),
        grad_x=lambda x, eta: np.asarray(phase.grad_eta(eta, x)),
        grad_eta=lambda x, eta: np.asarray(phase.grad_x(eta, x)),
        mixed_hessian=lambda x, eta: np.swapaxes(
            np.asarray(phase.mixed_hessian(eta, x)), -1, -2),
        params=dict(phase.params),
    )


def _transposed_symbol(sym: SymbolSpec) -> SymbolSpec:
    return SymbolSpec(
        name=f"t({sym.name})", order=(sym.order[1], sym.order[0]),
        fn=lambda x, eta: sym(eta, x), params=dict(sym.params),
    )


def _negated_phase(phase: PhaseSpec) -> PhaseSpec:
    return PhaseSpec(
        name=f"neg({phase.name})",
        fn=lambda x, eta: -np.asarray(phase.fn(x, eta)),
        grad_x=lambda x, eta: -np.asarray(phase.grad_x(x, eta)),
        grad_eta=lambda x, eta: -np.asarray(phase.grad_eta(x, eta)),
        mixed_hessian=lambda x, eta: -np.asarray(phase.mixed_hessian(x, eta)),
        params=dict(phase.params),
    )


def _starred_symbol(sym: SymbolSpec) -> SymbolSpec:
    return SymbolSpec(
        name=f"star({sym.name})", order=(sym.order[1], sym.order[0]),
        fn=lambda x, eta: np.conj(sym(eta, x)), params=dict(sym.params),
    )


def adjoint_identity_check(phase: PhaseSpec, sym: SymbolSpec,
                           corpus: Sequence[tuple[Signal, Signal]]) -> float:
    """max |<Af, g> - <f, Bg>| / (||f|| ||g||) over (f, g) pairs."""
    worst = 0.0
    for f, g in corpus:
        lhs = inner_product(apply_fio1(phase, sym, f, guard=False), g)
        rhs = inner_product(f, apply_fio2(phase, sym, g))
        den = lp_norm(f, 2) * lp_norm(g, 2)
        worst = max(worst, abs(lhs - rhs) / den)
    return worst


def transpose_identity_check(phase: PhaseSpec, sym: SymbolSpec,
                             corpus: Sequence[tuple[Signal, Signal]]) -> float:
    """Transpose against the bilinear pairing: tA = F o A_{tPhi, tsigma} o F^{-1}.

    Residual is |<Af, g>_bil - <f, tA g>_bil| / (||f|| ||g||), with
    <u, v>_bil = sum u v dx^d (no conjugation).
    """
    tp, ts = _transposed_phase(phase), _transposed_symbol(sym)
    worst = 0.0
    for f, g in corpus:
        dx = f.grid.space_step ** f.grid.dim
        Af = apply_fio1(phase, sym, f, guard=False)
        lhs = np.sum(Af.samples * g.samples) * dx
        tAg = fourier_transform(apply_fio1(tp, ts, inverse_fourier(g), guard=False))
        rhs = np.sum(f.samples * tAg.samples) * dx
        den = lp_norm(f, 2) * lp_norm(g, 2)
        worst = max(worst, abs(lhs - rhs) / den)
    return worst


def fourier_conjugation_check(phase: PhaseSpec, sym: SymbolSpec,
                              corpus: Sequence[Signal]) -> float:
    """Relative residual of B_{-tPhi, sigma*} = F^{-1} o A_{Phi,sigma} o F^{-1}.

    Comparing the two quantization definitions gives (B_{-tPhi,sigma*} f)^ =
    A_{Phi,sigma}(F^{-1} f) exactly; the often-quoted F A F^{-1} form differs
    from it by a parity (check Phi = x.eta, sigma = 1, where B is parity and
    F A F^{-1} is the identity).
    """
    bp = _negated_phase(_transposed_phase(phase))
    bs = _starred_symbol(sym)
    worst = 0.0
    for f in corpus:
        lhs = apply_fio2(bp, bs, f)
        rhs = inverse_fourier(apply_fio1(phase, sym, inverse_fourier(f), guard=False))
        worst = max(worst, lp_norm(Signal(f.grid, lhs.samples - rhs.samples), 2)
                    / lp_norm(f, 2))
    return worst


def dilation_conjugation_check(
    full_sym: SymbolSpec,
    phase: PhaseSpec,
    fam: LPFamily,
    j: int,
    k: int,
    corpus: Sequence[Signal],
) -> float:
    """A_{j,k} = U_lam o A~_{j,k} o U_{1/lam} with lam = 2^{(j-k)/2}.

    Needs generator-backed signals so the inner dilation is analytic; j - k
    must be even so the outer dilation re-indexes the grid exactly.
    """
    from .grid import dilate
    from .symbols import conjugated_piece, dyadic_piece

    if (j - k) % 2 != 0:
        raise ValueError("j - k must be even for grid-exact outer dilation")
    lam = 2.0 ** ((j - k) // 2)
    piece = dyadic_piece(full_sym, j, k, fam)
    s_t, p_t = conjugated_piece(piece, phase, j, k)
    worst = 0.0
    for f in corpus:
        direct = apply_fio1(phase, piece, f, guard=False)
        inner = dilate(f, 1.0 / lam)
        mid = apply_fio1(p_t, s_t, inner, guard=False)
        conj = dilate(mid, lam)
        num = lp_norm(Signal(f.grid, direct.samples - conj.samples), 2)
        worst = max(worst, num / lp_norm(f, 2))
    return worst


# ---------------------------------------------------------------------------
# Composition at leading order
# ---------------------------------------------------------------------------

def leading_symbol(p: SymbolSpec, phase: PhaseSpec, sigma: SymbolSpec) -> SymbolSpec:
    """First term of the composition expansion: p(x, grad_x Phi(x,eta)) sigma."""
    def fn(x, eta):
        gx = np.asarray(phase.grad_x(x, eta), dtype=float)
        return p(x, gx) * sigma(x, eta)

    return SymbolSpec(
        name=f"lead({p.name},{sigma.name})",
        order=(p.order[0] + sigma.order[0], p.order[1] + sigma.order[1]),
        fn=fn,
    )


def compose_leading(
    p: SymbolSpec,
    phase: PhaseSpec,
    sigma: SymbolSpec,
    js: Sequence[int],
    grid: GridSpec,
    x_center: float = 0.45,
    fam: Optional[LPFamily] = None,
) -> list[tuple[int, float]]:
    """Residual curve r_j = ||p(x,D) A f_j - S0 f_j||_2 / ||f_j||_2.

    f_j carries the unit band profile psi_j centred at x_center, so every
    dyadic band is probed with full strength.
    """
    from .grid import dual_grid

    fam = fam or LPFamily(j_max=max(js))
    s0 = leading_symbol(p, phase, sigma)
    eta = grid.freq_points()
    out = []
    for j in js:
        prof = fam.psi_j(j, eta).reshape(grid.shape)
        mod = np.exp(-2j * np.pi * x_center * np.sum(eta, axis=-1)).reshape(grid.shape)
        fj = inverse_fourier(Signal(dual_grid(grid), prof * mod))
        Af = apply_fio1(phase, sigma, fj, guard=False)
        pAf = apply_pseudo_kn(p, Af)
        s0f = apply_fio1(phase, s0, fj, guard=False)
        r = lp_norm(Signal(grid, pAf.samples - s0f.samples), 2) / lp_norm(fj, 2)
        out.append((int(j), float(r)))
    return out


def residuals_decay(curve: Sequence[tuple[int, float]], factor: float = 1.5) -> bool:
    vals = [r for _, r in curve]
    return all(vals[i] / vals[i + 1] >= factor for i in range(len(vals) - 1))


# ---------------------------------------------------------------------------
# Gabor matrices
# ---------------------------------------------------------------------------

@dataclass
class GaborMatrix:
    """entries[i', i] = <Op g_i, g_i'> over the flattened lattice index list.

    k_phys / n_phys hold the physical lattice positions (alpha*k, beta*n) of
    each flattened index, shape (num_atoms, d).
    """

    entries: Array
    k_phys: Array
    n_phys: Array
    lattice: GaborLattice
    window_id: str
    operator_id: str

    @property
    def num_atoms(self) -> int:
        return self.entries.shape[0]


def _atom_table(g: Window, lat: GaborLattice) -> tuple[Array, Array, Array]:
    """All lattice atoms as rows, plus their physical positions."""
    gr = g.grid
    d = gr.dim
    x = gr.space_axis()
    rows = []
    kp = []
    npos = []
    if d == 1:
        tones = np.exp(2j * np.pi * lat.beta * np.multiply.outer(lat.n_values.astype(float), x))
        for k in lat.k_index:
            tg = _shifted_window_1d(g.signal.samples, k * lat.k_step)
            for i, n in enumerate(lat.n_index):
                rows.append(tones[i] * tg)
                kp.append([lat.alpha * k])
                npos.append([lat.beta * n])
    else:
        for kt in lat.k_tuples():
            for nt in lat.n_tuples():
                rows.append(gabor_atom(g, lat, kt, nt).samples.ravel())
                kp.append([lat.alpha * v for v in kt])
                npos.append([lat.beta * v for v in nt])
    return np.asarray(rows), np.asarray(kp, dtype=float), np.asarray(npos, dtype=float)


def gabor_matrix(
    op: OperatorHandle,
    g: Window,
    lat: GaborLattice,
    zero_floor: float = ZERO_FLOOR,
    jobs: int | None = None,
) -> GaborMatrix:
    """Assemble <Op g_{k,n}, g_{k',n'}> column by column.

    d = 1 uses a batched kernel path (one dense kernel, two matmuls); other
    dimensions fall back to per-atom application.
    """
    gr = g.grid
    atoms, kp, npos = _atom_table(g, lat)
    m = atoms.shape[0]
    dx = gr.space_step ** gr.dim
    if gr.dim == 1 and op.kind in ("pseudo_kn", "fio_type1"):
        n = gr.samples_per_axis
        ph = _alternating_phase(n, 1)
        fhat = np.fft.fftshift(np.fft.fft(atoms, axis=1), axes=1) * ph * gr.space_step
        xs = gr.space_points()
        es = gr.freq_points()
        phase = op.phase if op.phase is not None else _linear_phase(1)
        outs = np.empty((n, m), dtype=complex)
        for lo in range(0, n, DEFAULT_CHUNK):
            hi = min(lo + DEFAULT_CHUNK, n)
            X = xs[lo:hi, None, :]
            E = es[None, :, :]
            K = np.exp(2j * np.pi * phase.fn(X, E)) * op.symbol(X, E)
            outs[lo:hi] = K @ (fhat.T * gr.freq_step)
        entries = (atoms.conj() @ outs) * dx
    else:
        cols = pmap(
            lambda row: op.apply(Signal(gr, row.reshape(gr.shape)), guard=False).samples.ravel()
            if op.kind != "fio_type2" else op.apply(Signal(gr, row.reshape(gr.shape))).samples.ravel(),
            list(atoms),
            jobs,
        )
        outs = np.asarray(cols).T
        entries = (atoms.conj() @ outs) * dx
    peak = np.abs(entries).max()
    if peak > 0:
        entries[np.abs(entries) < zero_floor * peak] = 0.0
    return GaborMatrix(entries=entries, k_phys=kp, n_phys=npos, lattice=lat,
                       window_id=g.window_id, operator_id=op.operator_id)


@dataclass
class DecayReport:
    constant: float
    worst: tuple[int, int]


def diag_decay_certify(M: GaborMatrix, m1: float, m2: float,
                       N1: int = 1, N2: int = 1) -> DecayReport:
    """Smallest C with |entry| <= C <n>^{m1} <k'>^{m2} <n-n'>^{-2N1} <k-k'>^{-2N2}."""
    kb = bracket(M.k_phys)
    nb = bracket(M.n_phys)
    dk = M.k_phys[:, None, :] - M.k_phys[None, :, :]
    dn = M.n_phys[:, None, :] - M.n_phys[None, :, :]
    decay = bracket(dn) ** (-2 * N1) * bracket(dk) ** (-2 * N2)
    envelope = np.outer(kb ** m2, nb ** m1) * decay
    ratios = np.abs(M.entries) / envelope
    i = int(np.argmax(ratios))
    return DecayReport(constant=float(ratios.ravel()[i]),
                       worst=(i // M.num_atoms, i % M.num_atoms))


def weyl_decay_certify(M: GaborMatrix, m1: float, m2: float,
                       N1: int = 1, N2: int = 1) -> DecayReport:
    """Weyl variant: weights <n+n'>^{m1} <k+k'>^{m2} (midpoint covariance)."""
    sk = bracket(M.k_phys[:, None, :] + M.k_phys[None, :, :])
    sn = bracket(M.n_phys[:, None, :] + M.n_phys[None, :, :])
    dk = bracket(M.k_phys[:, None, :] - M.k_phys[None, :, :])
    dn = bracket(M.n_phys[:, None, :] - M.n_phys[None, :, :])
    envelope = sn ** m1 * sk ** m2 * dn ** (-2 * N1) * dk ** (-2 * N2)
    ratios = np.abs(M.entries) / envelope
    i = int(np.argmax(ratios))
    return DecayReport(constant=float(ratios.ravel()[i]),
                       worst=(i // M.num_atoms, i % M.num_atoms))


@dataclass
class SchurReport:
    """The four mixed sums of Prop.-style generalized Schur tests.

    sup_row/sup_col are the plain l^infty l^1 sums; mixed_a is
    sup_n sum_{n'} sup_{k'} sum_k and mixed_b the index-swapped partner.
    All four finite (and stable under lattice enlargement) certifies
    l^{p,q} boundedness of the matrix for every p, q.
    """

    sup_row: float
    sup_col: float
    mixed_a: float
    mixed_b: float

    @property
    def all_finite(self) -> bool:
        return all(np.isfinite(v) for v in (self.sup_row, self.sup_col,
                                            self.mixed_a, self.mixed_b))

    @property
    def worst(self) -> float:
        return max(self.sup_row, self.sup_col, self.mixed_a, self.mixed_b)


def schur_certify(M: GaborMatrix, weight: Optional[Callable] = None) -> SchurReport:
    """weight(k', n', k, n), when given, multiplies |entries| pointwise."""
    a = np.abs(M.entries)
    if weight is not None:
        w = weight(M.k_phys[:, None, :], M.n_phys[:, None, :],
                   M.k_phys[None, :, :], M.n_phys[None, :, :])
        a = a * w
    sup_row = float(np.max(np.sum(a, axis=1)))
    sup_col = float(np.max(np.sum(a, axis=0)))
    nk = len(M.lattice.k_index) ** M.lattice.grid.dim
    nn = len(M.lattice.n_index) ** M.lattice.grid.dim
    # flattened order is k-major: index = k_flat * nn + n_flat
    b = a.reshape(nk, nn, nk, nn)
    # sup over n of sum over n' of sup over k' of sum over k
    inner = np.sum(b, axis=2)            # over k -> (k', n', n)
    inner = np.max(inner, axis=0)        # sup over k' -> (n', n)
    mixed_a = float(np.max(np.sum(inner, axis=0)))  # sum n', sup n
    inner_b = np.sum(b, axis=0)          # over k' -> (n', k, n)
    inner_b = np.max(inner_b, axis=1)    # sup over k -> (n', n)
    mixed_b = float(np.max(np.sum(inner_b, axis=1)))  # sum n, sup n'
    return SchurReport(sup_row=sup_row, sup_col=sup_col,
                       mixed_a=mixed_a, mixed_b=mixed_b)


@dataclass
class ConcentrationReport:
    max_cell_distance: float
    distances: Array

    def passed(self, cells: float = 2.0) -> bool:
        return bool(self.max_cell_distance <= cells)


def fio_kernel_concentration(M: GaborMatrix, phase: PhaseSpec) -> ConcentrationReport:
    """Peak offsets against the canonical-relation prediction.

    For a column at (y, omega) the kernel should peak where
    grad_eta Phi(y', omega) = y and omega' = grad_x Phi(y', omega); y' is
    located on the lattice by direct search along the k axis.
    """
    lat = M.lattice
    d = lat.grid.dim
    alpha, beta = lat.alpha, lat.beta
    kcand = np.asarray(sorted(set(map(tuple, M.k_phys.tolist()))), dtype=float)
    col_norms = np.sqrt(np.sum(np.abs(M.entries) ** 2, axis=0))
    keep = col_norms > 1e-12 * col_norms.max()
    dists = []
    for i in np.nonzero(keep)[0]:
        y = M.k_phys[i]
        om = M.n_phys[i]
        ge = np.asarray(phase.grad_eta(kcand, np.broadcast_to(om, kcand.shape)))
        jbest = int(np.argmin(np.sum((ge - y) ** 2, axis=-1)))
        ypred = kcand[jbest]
        opred = np.asarray(phase.grad_x(ypred[None, :], om[None, :]))[0]
        ipk = int(np.argmax(np.abs(M.entries[:, i])))
        dk = np.max(np.abs(M.k_phys[ipk] - ypred)) / alpha
        dn = np.max(np.abs(M.n_phys[ipk] - opred)) / beta
        dists.append(max(dk, dn))
    dists = np.asarray(dists)
    return ConcentrationReport(max_cell_distance=float(dists.max()), distances=dists)


# ---------------------------------------------------------------------------
# Operator norms
# ---------------------------------------------------------------------------

@dataclass
class OpNormReport:
    value: float
    method: str
    iterations: int
    converged: bool


def _normal_operator(op: OperatorHandle) -> Callable[[Signal], Signal]:
    """A*A as a fast closure.

    For dense-friendly sizes the type I kernel is assembled once so each
    power-iteration step costs two FFTs and two matrix-vector products
    instead of a full kernel re-evaluation.
    """
    gr = op.grid
    if op.kind == "fio_type1" and gr.size <= 4096:
        xs = gr.space_points()[:, None, :]
        es = gr.freq_points()[None, :, :]
        K = np.exp(2j * np.pi * op.phase.fn(xs, es)) * op.symbol(xs, es)
        deta = gr.freq_step ** gr.dim
        dx = gr.space_step ** gr.dim
        from .grid import dual_grid
        gd = dual_grid(gr)

        def apply(v: Signal) -> Signal:
            vh = fourier_transform(v).samples.ravel()
            w = K @ (vh * deta)
            gh = (K.conj().T @ (w * dx)).reshape(gr.shape)
            return inverse_fourier(Signal(gd, gh))

        return apply
    return lambda v: op.adjoint_apply(op.apply(v, guard=False))


def op_norm_estimate(
    op: OperatorHandle,
    p: float = 2.0,
    method: str = "power_iter_l2",
    corpus: Optional[Sequence[Signal]] = None,
    tol: float = 1e-4,
    maxiter: int = 1000,
    seed: int = 3,
    mod_norm_fn: Optional[Callable[[Signal], float]] = None,
) -> OpNormReport:
    """L^2 norm by power iteration on A*A, or a corpus max-ratio lower bound.

    corpus_max_ratio evaluates mod_norm_fn (any norm functional) on Op f and
    f; with the default it is the L^2 ratio.
    """
    if method == "power_iter_l2":
        if p != 2.0:
            raise ValueError("power iteration certifies the L^2 norm only")
        gr = op.grid
        normal_apply = _normal_operator(op)
        rng = np.random.default_rng(seed)
        v = Signal(gr, rng.normal(size=gr.shape) + 1j * rng.normal(size=gr.shape))
        lam = 0.0
        its = 0
        converged = False
        for it in range(1, maxiter + 1):
            its = it
            w = normal_apply(v)
            new = float(np.sqrt(abs(inner_product(w, v)) / inner_product(v, v).real))
            nrm = lp_norm(w, 2)
            if nrm == 0:
                return OpNormReport(0.0, method, it, True)
            v = Signal(gr, w.samples / nrm)
            if it > 3 and abs(new - lam) <= tol * max(new, 1e-300):
                converged = True
                lam = new
                break
            lam = new
        return OpNormReport(value=float(lam), method=method, iterations=its,
                           converged=converged)
    if method == "corpus_max_ratio":
        if corpus is None:
            raise ValueError("corpus_max_ratio needs a corpus")
        fn = mod_norm_fn if mod_norm_fn is not None else (lambda s: lp_norm(s, p))
        best = 0.0
        for f in corpus:
            best = max(best, fn(op.apply(f, guard=False)) / fn(f))
        return OpNormReport(value=float(best), method=method, iterations=len(corpus),
                            converged=True)
    raise ValueError(f"unknown method {method}")
