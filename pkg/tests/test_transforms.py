import math

import numpy as np
import pytest

from cohentf import (
    Dirac,
    Sampled,
    SeparableGaussianWigner,
    Signal,
    TFFunction,
    c_const,
    cohen_rep,
    conjugate,
    gabor,
    gaussian,
    lp_norm,
    make_grid,
    tf_shift,
    wigner,
    wigner_via_gabor,
)
from cohentf.grid import reflect
from cohentf.transforms import kernel_array, parse_kernel, shared_lattice_mask, tf_convolve, translate_tf
from cohentf.verify import random_kernel, random_mixture


def closed_form_wigner(lam, grid):
    return np.outer(gaussian("phi", 2 * lam, grid).samples, gaussian("phi", 2 / lam, grid.dual()).samples)


def test_gabor_at_origin_is_inner_product(grid, rng):
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    V = gabor(f, g).samples
    inner = grid.dx * np.vdot(g.samples, f.samples)
    assert abs(V[grid.origin_index, grid.n // 2] - inner) < 1e-14 * max(1, abs(inner))


def test_gabor_moyal_gaussians(grid):
    f, g = gaussian("Phi", 1.0, grid), gaussian("Phi", 2.0, grid)
    # oracle: ||V_g f||_2 = ||f||_2 ||g||_2 = 1 for L2-normalised Gaussians
    assert abs(lp_norm(gabor(f, g), 2) - 1.0) < 1e-6


def test_gabor_matches_definition_by_direct_sum(rng):
    g0 = make_grid(32, 0.25)
    f, g = random_mixture(rng, g0), random_mixture(rng, g0)
    V = gabor(f, g).samples
    t = g0.x
    for j in (0, 7, 16, 31):
        # translation is circular: g(t - x_j) read from index (m - j + o) mod n
        shifted = g.samples[(np.arange(32) - j + g0.origin_index) % 32]
        row = g0.dx * np.exp(-2j * np.pi * np.outer(g0.w, t)) @ (f.samples * shifted.conj())
        np.testing.assert_allclose(V[j], row, atol=1e-13)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_gabor_sup_bound(grid, rng, q):
    for _ in range(5):
        f, g = random_mixture(rng, grid), random_mixture(rng, grid)
        assert lp_norm(gabor(f, g), math.inf) <= lp_norm(f, q) * lp_norm(g, conjugate(q)) * (1 + 1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_wigner_gaussian_closed_form(grid, lam):
    P = gaussian("Phi", lam, grid)
    assert np.abs(wigner(P, P).samples - closed_form_wigner(lam, grid)).max() < 1e-6


def test_wigner_gaussian_peak(grid):
    P = gaussian("Phi", 1.0, grid)
    assert abs(wigner(P, P).samples[grid.origin_index, grid.n // 2] - 2.0) < 1e-6


def test_wigner_self_term_real(grid, rng):
    f = random_mixture(rng, grid)
    W = wigner(f, f).samples
    assert np.abs(W.imag).max() < 1e-10 * np.abs(W).max()


def test_wigner_conjugate_symmetry(grid, rng):
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    np.testing.assert_allclose(wigner(g, f).samples, wigner(f, g).samples.conj(), atol=1e-10)


@pytest.mark.parametrize("transform", [gabor, wigner])
def test_sesquilinearity(grid, rng, transform):
    f1, f2, g = (random_mixture(rng, grid) for _ in range(3))
    a, b = 0.7 - 1.3j, -0.4 + 2.1j
    lhs = transform(f1 * a + f2 * b, g).samples
    rhs = a * transform(f1, g).samples + b * transform(f2, g).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
    lhs = transform(g, f1 * a).samples
    np.testing.assert_allclose(lhs, np.conj(a) * transform(g, f1).samples, atol=1e-10)


def test_wigner_via_gabor_matches(grid, rng):
    mask = shared_lattice_mask(grid)
    assert mask.sum() == (grid.n // 2) ** 2
    for _ in range(5):
        f, g = random_mixture(rng, grid), random_mixture(rng, grid)
        err = np.abs(wigner(f, g).samples - wigner_via_gabor(f, g).samples)[mask].max()
        assert err < 1e-8
    W = wigner_via_gabor(f, g).samples
    assert np.all(W[~mask] == 0)


def test_wigner_via_gabor_gaussian_closed_form(grid):
    P = gaussian("Phi", 1.0, grid)
    mask = shared_lattice_mask(grid)
    err = np.abs(wigner_via_gabor(P, P).samples - closed_form_wigner(1.0, grid))[mask].max()
    assert err < 1e-6


def _norm_identity_gap(f, g, p):
    lhs = lp_norm(wigner_via_gabor(f, g), p)
    rhs = 2 ** ((p - 2) / p) * lp_norm(gabor(f, reflect(g)), p)
    return abs(lhs - rhs) / max(1.0, rhs)


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0, 8.0])
def test_wigner_gabor_norm_identity_gaussians(grid, rng, p):
    for _ in range(3):
        la, lb = rng.uniform(0.5, 2.0, 2)
        ca, cb, fa, fb = rng.uniform(-1.0, 1.0, 4)
        f = gaussian("Phi", la, grid, center=ca, freq=fa)
        g = gaussian("Phi", lb, grid, center=cb, freq=fb)
        assert _norm_identity_gap(f, g, p) < 1e-8


@pytest.mark.parametrize("p", [2.0, 4.0, 8.0])
def test_wigner_gabor_norm_identity_mixtures_even_p(grid, rng, p):
    for _ in range(3):
        assert _norm_identity_gap(random_mixture(rng, grid), random_mixture(rng, grid), p) < 1e-8


def test_wigner_gabor_norm_identity_mixtures_odd_p(grid, rng):
    # |V|^p is not smooth at zeros of V for odd p, so the half-density
    # Riemann sum on the shared lattice is only accurate to ~1e-7 there
    worst = max(_norm_identity_gap(random_mixture(rng, grid), random_mixture(rng, grid), 3.0) for _ in range(5))
    assert worst < 1e-5


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (4.0, 2.0), (4.0, 4.0)])
def test_wigner_lp_bound(grid, rng, p, q):
    for _ in range(5):
        f, g = random_mixture(rng, grid), random_mixture(rng, grid)
        bound = c_const(p, q) * lp_norm(f, q) * lp_norm(g, conjugate(q))
        assert lp_norm(wigner(f, g), p) <= 1.01 * bound


def test_cohen_dirac_is_wigner(grid, rng):
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    np.testing.assert_array_equal(cohen_rep(Dirac(), f, g).samples, wigner(f, g).samples)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_spectrogram_identity(grid, rng, lam):
    f = random_mixture(rng, grid)
    Q = cohen_rep(SeparableGaussianWigner(lam), f, f).samples
    S = np.abs(gabor(f, gaussian("Phi", lam, grid)).samples) ** 2
    assert np.abs(Q - S).max() < 1e-6


def test_sampled_kernel_matches_symbolic(grid, rng):
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    k = SeparableGaussianWigner(1.5)
    sampled = Sampled(TFFunction.from_function(grid, k))
    np.testing.assert_allclose(cohen_rep(sampled, f, g).samples, cohen_rep(k, f, g).samples, atol=1e-13)


def test_zero_padding_agrees_for_decaying_data(grid, rng):
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    k = SeparableGaussianWigner(1.0)
    per = cohen_rep(k, f, g).samples
    zer = cohen_rep(k, f, g, padding="zero").samples
    assert np.abs(per - zer).max() < 1e-10
    with pytest.raises(ValueError):
        cohen_rep(k, f, g, padding="mirror")


def test_tf_convolve_direct_sum(rng):
    g0 = make_grid(16, 0.5)
    A = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    K = rng.normal(size=(16, 16))
    out = tf_convolve(A, K, g0)
    j, k = 5, 11
    direct = sum(A[a, b] * K[(j - a) % 16, (k - b) % 16] for a in range(16) for b in range(16)) * g0.dx * g0.dw
    assert abs(out[j, k] - direct) < 1e-12


@pytest.mark.parametrize("kind", ["dirac", "gauss", "sampled"])
def test_covariance(grid, rng, kind):
    kernel = {"dirac": Dirac(), "gauss": SeparableGaussianWigner(0.8), "sampled": random_kernel(rng, grid)}[kind]
    f, g = random_mixture(rng, grid), random_mixture(rng, grid)
    for ka, kb in [(3, -5), (-16, 7), (0, 12)]:
        a, b = ka * grid.dx, kb * grid.dw
        Q = cohen_rep(kernel, f, g)
        Qs = cohen_rep(kernel, tf_shift(f, a, b), tf_shift(g, a, b))
        assert np.abs(Qs.samples - translate_tf(Q, a, b).samples).max() < 1e-8


def test_kernel_parsing_and_offsets(grid):
    assert parse_kernel("dirac") == Dirac()
    assert parse_kernel("gausswig:2") == SeparableGaussianWigner(2.0)
    assert parse_kernel("GaussWig") == SeparableGaussianWigner(1.0)
    with pytest.raises(ValueError):
        parse_kernel("bornjordan")
    with pytest.raises(ValueError):
        SeparableGaussianWigner(0.0)
    assert kernel_array(Dirac(), grid) is None
    k0 = kernel_array(SeparableGaussianWigner(1.0), grid)
    assert k0[0, 0] == pytest.approx(2.0)
    assert np.unravel_index(np.argmax(np.abs(k0)), k0.shape) == (0, 0)


def test_grid_mismatch_rejected(grid, small_grid):
    f = gaussian("Phi", 1.0, grid)
    g = gaussian("Phi", 1.0, small_grid)
    for fn in (gabor, wigner, wigner_via_gabor):
        with pytest.raises(ValueError):
            fn(f, g)


def test_tf_function_validation(grid):
    with pytest.raises(ValueError):
        TFFunction(grid, np.zeros((3, 3)))
    bad = np.zeros((grid.n, grid.n))
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        TFFunction(grid, bad)
    g2 = make_grid(16, 0.5, dim=2)
    with pytest.raises(NotImplementedError):
        wigner(Signal(g2, np.ones(256)), Signal(g2, np.ones(256)))


def test_translate_tf_rejects_fractional(grid):
    F = TFFunction(grid, np.ones((grid.n, grid.n)))
    with pytest.raises(ValueError):
        translate_tf(F, 0.5 * grid.dx, 0.0)
