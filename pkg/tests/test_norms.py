import numpy as np
import pytest

from fiolab.gabor import GaborLattice, Window, gabor_analysis, tight_window
from fiolab.grid import (
    GridSpec,
    Signal,
    WeightSpec,
    bandlimited_generator,
    bump_generator,
    gaussian_generator,
    fourier_transform,
    lp_norm,
    modulate,
    random_schwartz_signal,
    translate,
)
from fiolab.norms import (
    HypothesisError,
    dilation_exponent_check,
    dilation_indices,
    fl_norm,
    gabor_norm_equivalence_check,
    lloc_check,
    mod_norm,
    seq_norm,
)

from conftest import make_corpus


@pytest.fixture(scope="module")
def g256():
    return GridSpec(1, 8.0, 256)


@pytest.fixture(scope="module")
def w256(g256):
    return Window.gaussian(g256)


class TestModNorm:
    def test_m2_equals_l2(self, g256, w256):
        for f in make_corpus(g256, 5, seed=20):
            v = mod_norm(f, 2, window=w256).value
            assert abs(v - lp_norm(f, 2)) / lp_norm(f, 2) < 1e-6

    def test_shift_invariance(self, g256, w256):
        f = Signal.from_generator(g256, gaussian_generator())
        x0 = 32 * g256.space_step
        eta0 = 36 * g256.freq_step
        for p in (1.0, 2.0, np.inf):
            v0 = mod_norm(f, p, window=w256).value
            shifted = modulate(translate(f, [x0]), [eta0])
            v1 = mod_norm(shifted, p, window=w256).value
            assert abs(v1 - v0) / v0 < 1e-8

    def test_gaussian_m1_quadrature_oracle(self, g256, w256):
        # |V| = exp(-pi (x^2+eta^2)/2) integrates to 2 exactly; the refined
        # quadrature of the closed form is the oracle
        f = w256.signal
        v = mod_norm(f, 1, window=w256).value
        xs = np.linspace(-12, 12, 4801)
        quad = np.trapezoid(np.exp(-np.pi * xs ** 2 / 2), xs) ** 2
        assert abs(v - quad) / quad < 1e-4
        assert abs(quad - 2.0) < 1e-10

    def test_mixed_norm_axes(self, g256, w256):
        # p=inf, q=2 differs from p=2, q=inf for an asymmetric signal
        f = Signal.from_generator(g256, gaussian_generator(0.5))
        a = mod_norm(f, np.inf, 2, window=w256).value
        b = mod_norm(f, 2, np.inf, window=w256).value
        assert a != pytest.approx(b, rel=1e-3)

    def test_holder_chain(self, g256, w256):
        # pointwise |V| <= ||f|| ||g|| forces M^inf <= M^2 <= M^1
        for f in make_corpus(g256, 5, seed=21):
            m1 = mod_norm(f, 1, window=w256).value
            m2 = mod_norm(f, 2, window=w256).value
            mi = mod_norm(f, np.inf, window=w256).value
            assert mi <= m2 * (1 + 1e-6)
            assert m2 <= m1 * (1 + 1e-6)

    def test_weight_monotonicity(self, g256, w256):
        f = random_schwartz_signal(g256, np.random.default_rng(23))
        v00 = mod_norm(f, 1, weight=WeightSpec(0, 0), window=w256).value
        v11 = mod_norm(f, 1, weight=WeightSpec(1, 1), window=w256).value
        v22 = mod_norm(f, 1, weight=WeightSpec(2, 2), window=w256).value
        assert v00 <= v11 * (1 + 1e-12) and v11 <= v22 * (1 + 1e-12)

    def test_window_independence(self, g256):
        wa = Window.gaussian(g256, 1.0)
        wb = Window.gaussian(g256, 0.6)
        ratios = []
        for f in make_corpus(g256, 8, seed=24):
            ra = mod_norm(f, 1, window=wa).value
            rb = mod_norm(f, 1, window=wb).value
            ratios.append(ra / rb)
        assert max(ratios) / min(ratios) < 10.0


class TestFlNorm:
    def test_modulation_invariance(self):
        g = GridSpec(1, 2.0, 1024)
        base = bump_generator()
        vals = [fl_norm(Signal.from_generator(g, base.modulated([float(n)])), 1.0)
                for n in (8, 16, 32, 64)]
        assert max(vals) - min(vals) < 1e-8 * vals[0]

    def test_parseval(self, g256):
        f = random_schwartz_signal(g256, np.random.default_rng(25))
        assert abs(fl_norm(f, 2) - lp_norm(f, 2)) / lp_norm(f, 2) < 1e-10

    def test_gaussian_self_dual(self, g256):
        f = Signal.from_generator(g256, gaussian_generator())
        assert abs(fl_norm(f, 1) - lp_norm(f, 1)) / lp_norm(f, 1) < 1e-10


class TestSeqNorm:
    def test_single_coefficient(self, g256, w256):
        lat = GaborLattice.for_grid(g256, 0.5, 0.5, k_radius=4, n_radius=4)
        from fiolab.gabor import GaborCoeffs
        vals = np.zeros((9, 9), dtype=complex)
        vals[6, 2] = 2.0 - 1.0j  # k = 2, n = -2
        c = GaborCoeffs(lat, vals)
        w = WeightSpec(s1=1.0, s2=2.0)
        expect = abs(vals[6, 2]) * np.sqrt(1 + 1.0) ** 2.0 * np.sqrt(1 + 1.0) ** 1.0
        assert abs(seq_norm(c, 1, 1, w) - expect) < 1e-12

    def test_diagonal_reduces_to_lp(self, g256, w256):
        lat = GaborLattice.for_grid(g256, 0.5, 0.5, k_radius=3, n_radius=3)
        rng = np.random.default_rng(26)
        vals = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
        from fiolab.gabor import GaborCoeffs
        c = GaborCoeffs(lat, vals)
        wk = np.sqrt(1 + (0.5 * lat.k_values) ** 2) ** 1.5
        wn = np.sqrt(1 + (0.5 * lat.n_values) ** 2) ** 0.5
        direct = (np.sum((np.abs(vals) * np.outer(wk, wn)) ** 3)) ** (1 / 3)
        assert abs(seq_norm(c, 3, 3, WeightSpec(0.5, 1.5)) - direct) < 1e-12

    def test_l2_within_frame_bounds(self, g256, w256):
        from fiolab.gabor import frame_matrix_dense
        lat = GaborLattice.for_grid(g256, 0.5, 0.5, window=w256)
        spec = np.linalg.eigvalsh(frame_matrix_dense(w256, lat))
        f = random_schwartz_signal(g256, np.random.default_rng(27))
        q = seq_norm(gabor_analysis(f, w256, lat), 2, 2) ** 2
        n2 = lp_norm(f, 2) ** 2
        assert spec[0] * n2 * (1 - 1e-10) <= q <= spec[-1] * n2 * (1 + 1e-10)


class TestEquivalence:
    def test_parseval_tight(self, g256, w256):
        lat = GaborLattice.for_grid(g256, 0.5, 0.5, window=w256)
        h = tight_window(w256, lat)
        hn = Window.from_signal(h.signal, normalize=True)
        rep = gabor_norm_equivalence_check(
            make_corpus(g256, 5, seed=28), 2, 2, WeightSpec(), hn, lat,
            analysis_window=h)
        assert rep.lo > 0.99 and rep.hi < 1.01

    @pytest.mark.parametrize("p,w", [(1.0, WeightSpec()), (1.0, WeightSpec(1, 1)),
                                     (np.inf, WeightSpec())])
    def test_spread_bounded(self, g256, w256, p, w):
        lat = GaborLattice.for_grid(g256, 0.5, 0.5, window=w256)
        rep = gabor_norm_equivalence_check(
            make_corpus(g256, 6, seed=29), p, p, w, w256, lat)
        assert rep.spread < 10.0


class TestLloc:
    def test_compact_support_stable_under_modulation(self):
        g = GridSpec(1, 2.0, 1024)
        ratios = []
        for n in (8, 16, 32, 64, 128):
            f = Signal.from_generator(g, bump_generator().modulated([float(n)]))
            rep = lloc_check(f, 2, 2, window=Window.gaussian(g, 0.4))
            assert rep.kind == "compact-support"
            ratios.append(rep.ratio)
        assert max(ratios) / min(ratios) < 2.0

    def test_band_limited_stable_under_translation(self):
        g = GridSpec(1, 8.0, 256)
        base = bandlimited_generator(g, band_edge=2.0)
        ratios = []
        for s in (-16, 0, 16, 32):
            f = translate(Signal.from_generator(g, base), [s * g.space_step])
            rep = lloc_check(f, 2, 2, window=Window.gaussian(g))
            assert rep.kind == "band-limited"
            ratios.append(rep.ratio)
        assert max(ratios) / min(ratios) < 2.0

    def test_gaussian_rejected(self, g256):
        f = Signal.from_generator(g256, gaussian_generator())
        with pytest.raises(HypothesisError):
            lloc_check(f, 2, 2)


class TestDilationExponents:
    def test_indices(self):
        assert dilation_indices(1.0) == (0.0, -1.0)
        assert dilation_indices(2.0) == (-0.5, -0.5)
        assert dilation_indices(np.inf) == (0.0, -1.0)
        assert dilation_indices(4.0) == (-0.25, -0.75)

    def test_p2_exact_scaling(self):
        g = GridSpec(1, 20.0, 1024)
        f = Signal.from_generator(g, gaussian_generator())
        fit = dilation_exponent_check(f, 2, [1, 2, 4], window=Window.gaussian(g), x_stride=2)
        assert abs(fit.slope + 0.5) < 0.02

    def test_p1_upper_regime(self):
        g = GridSpec(1, 20.0, 1024)
        f = Signal.from_generator(g, gaussian_generator())
        fit = dilation_exponent_check(f, 1, [1, 2, 4], window=Window.gaussian(g), x_stride=2)
        mu1, _ = dilation_indices(1.0)
        assert fit.slope <= g.dim * mu1 + 0.1
