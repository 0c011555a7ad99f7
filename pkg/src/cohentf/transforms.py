"""Short-time Fourier (Gabor), cross-Wigner and Cohen-class representations.

Time-frequency functions are n x n arrays indexed (x-index, w-index) on the
product of a grid and its dual lattice.  Only d = 1 is supported here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.fft as sfft
from scipy.signal import fftconvolve

from .grid import Grid, Signal, _same_grid, _workers, dft, reflect, upsample2

__all__ = [
    "TFFunction",
    "CohenKernel",
    "Dirac",
    "SeparableGaussianWigner",
    "Sampled",
    "parse_kernel",
    "gabor",
    "wigner",
    "wigner_via_gabor",
    "shared_lattice_mask",
    "cohen_rep",
    "kernel_array",
    "tf_convolve",
    "translate_tf",
]


@dataclass(frozen=True, eq=False)
class TFFunction:
    """Complex samples on grid x dual grid, shape (n, n)."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        if self.grid.dim != 1:
            raise NotImplementedError("time-frequency functions are implemented for d = 1")
        s = np.array(self.samples, dtype=complex)
        n = self.grid.n
        if s.shape != (n, n):
            raise ValueError(f"expected shape {(n, n)}, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("time-frequency samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def fgrid(self) -> Grid:
        return self.grid.dual()

    @property
    def cell(self) -> float:
        return self.grid.dx * self.grid.dw

    @classmethod
    def from_function(cls, grid: Grid, func) -> "TFFunction":
        """Sample ``func(x, w)`` (broadcasting) on the TF lattice."""
        X, W = np.meshgrid(grid.x, grid.w, indexing="ij")
        return cls(grid, np.broadcast_to(func(X, W), X.shape))

    def conj(self) -> "TFFunction":
        return TFFunction(self.grid, self.samples.conj())


# ---------------------------------------------------------------------------
# Cohen kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dirac:
    """sigma = delta: the Cohen representation is the Wigner transform itself."""


@dataclass(frozen=True)
class SeparableGaussianWigner:
    """sigma(x, w) = phi_{2 lam}(x) phi_{2/lam}(w), the Wigner transform of Phi_lam."""

    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    def __call__(self, x, w):
        a, b = 2.0 * self.lam, 2.0 / self.lam
        return math.sqrt(a) * np.exp(-np.pi * a * x ** 2) * math.sqrt(b) * np.exp(-np.pi * b * w ** 2)


@dataclass(frozen=True, eq=False)
class Sampled:
    """A kernel given by its samples on the target TF grid (grid coordinates)."""

    tf: TFFunction


CohenKernel = Union[Dirac, SeparableGaussianWigner, Sampled]


def parse_kernel(text: str) -> CohenKernel:
    """Parse ``dirac`` or ``gausswig:<lam>``."""
    t = text.strip().lower()
    if t == "dirac":
        return Dirac()
    if t.startswith("gausswig"):
        _, _, lam = t.partition(":")
        return SeparableGaussianWigner(float(lam) if lam else 1.0)
    raise ValueError(f"unknown kernel spec {text!r}")


def kernel_array(kernel: CohenKernel, grid: Grid) -> Optional[np.ndarray]:
    """Kernel samples at lattice offsets, offset zero at index (0, 0).

    Offsets wrap periodically: index i stands for i*dx when i < n/2 and
    (i - n)*dx otherwise (likewise in w).  Returns None for the Dirac kernel.
    """
    n = grid.n
    if isinstance(kernel, Dirac):
        return None
    if isinstance(kernel, SeparableGaussianWigner):
        xo = sfft.fftfreq(n, grid.dw)
        wo = sfft.fftfreq(n, grid.dx)
        return np.asarray(kernel(xo[:, None], wo[None, :]), dtype=complex)
    if isinstance(kernel, Sampled):
        _same_grid(kernel.tf.grid, grid)
        o = grid.origin_index
        # grid index o holds x = 0; dual index n/2 holds w = 0
        return np.roll(np.asarray(kernel.tf.samples), (-o, -(n // 2)), axis=(0, 1))
    raise TypeError(f"not a Cohen kernel: {kernel!r}")


def _conj_reflect(k0: np.ndarray) -> np.ndarray:
    """Offset array of conj(sigma(-z)) from that of sigma(z)."""
    n = k0.shape[0]
    idx = (-np.arange(n)) % n
    return k0[np.ix_(idx, idx)].conj()


def tf_convolve(values: np.ndarray, k0: np.ndarray, grid: Grid, padding: str = "periodic") -> np.ndarray:
    """(A * sigma)(x_j, w_k) = sum A(y, eta) sigma(x_j - y, w_k - eta) dx dw.

    ``k0`` holds kernel offsets as returned by :func:`kernel_array`.
    ``padding="periodic"`` is a circular convolution on the torus (exact for
    symbols that are constant along an axis); ``"zero"`` zero-pads to 2n per
    axis and crops.
    """
    weight = grid.dx * grid.dw
    if padding == "periodic":
        out = sfft.ifft2(sfft.fft2(values, workers=_workers()) * sfft.fft2(k0, workers=_workers()), workers=_workers())
        return weight * out
    if padding == "zero":
        n = grid.n
        kc = sfft.fftshift(k0)
        full = fftconvolve(values, kc, mode="full")
        h = n // 2
        return weight * full[h:h + n, h:h + n]
    raise ValueError(f"unknown padding {padding!r}")


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def _check_pair(f: Signal, g: Signal) -> Grid:
    _same_grid(f.grid, g.grid)
    if f.grid.dim != 1:
        raise NotImplementedError("transforms are implemented for d = 1")
    return f.grid


def gabor(f: Signal, g: Signal) -> TFFunction:
    """V_g f(x, w) = int exp(-2 pi i w t) f(t) conj(g(t - x)) dt.

    Row j is the DFT of t -> f(t) conj(g(t - x_j)); translation is circular.
    """
    grid = _check_pair(f, g)
    n = grid.n
    o = grid.origin_index
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    prod = f.samples[None, :] * g.samples.conj()[(m - j + o) % n]
    return TFFunction(grid, dft(prod, grid, axis=1))


def wigner(f: Signal, g: Signal) -> TFFunction:
    """Cross-Wigner transform int exp(-2 pi i w t) f(x + t/2) conj(g(x - t/2)) dt.

    Half-sample values come from 2x band-limited interpolation; the lag t
    runs over the n lattice displacements in [-n*dx/2, n*dx/2).
    """
    grid = _check_pair(f, g)
    n = grid.n
    f2 = upsample2(f.samples)
    g2 = upsample2(g.samples)
    lag = np.arange(n)
    lag = np.where(lag < n // 2, lag, lag - n)  # lag index m <-> t = m*dx
    j = np.arange(n)[:, None]
    corr = f2[(2 * j + lag[None, :]) % (2 * n)] * g2[(2 * j - lag[None, :]) % (2 * n)].conj()
    spec = sfft.fftshift(sfft.fft(corr, axis=1, workers=_workers()), axes=1)
    return TFFunction(grid, grid.dx * spec)


def shared_lattice_mask(grid: Grid) -> np.ndarray:
    """TF points (x, w) for which (2x, 2w) is again a lattice point."""
    n = grid.n
    o = grid.origin_index
    J = 2 * np.arange(n) - o
    K = 2 * np.arange(n) - n // 2
    okx = (J >= 0) & (J < n)
    okw = (K >= 0) & (K < n)
    return okx[:, None] & okw[None, :]


def wigner_via_gabor(f: Signal, g: Signal) -> TFFunction:
    """2 exp(4 pi i x w) V_{g~} f(2x, 2w) on the shared lattice, zero elsewhere."""
    grid = _check_pair(f, g)
    n = grid.n
    o = grid.origin_index
    V = gabor(f, reflect(g)).samples
    mask = shared_lattice_mask(grid)
    J = np.clip(2 * np.arange(n) - o, 0, n - 1)
    K = np.clip(2 * np.arange(n) - n // 2, 0, n - 1)
    phase = np.exp(4j * np.pi * grid.x[:, None] * grid.w[None, :])
    out = 2.0 * phase * V[np.ix_(J, K)]
    return TFFunction(grid, np.where(mask, out, 0.0))


def cohen_rep(kernel: CohenKernel, f: Signal, g: Signal, padding: str = "periodic") -> TFFunction:
    """Q_sigma(f, g) = sigma * Wig(f, g)."""
    W = wigner(f, g)
    k0 = kernel_array(kernel, W.grid)
    if k0 is None:
        return W
    return TFFunction(W.grid, tf_convolve(W.samples, k0, W.grid, padding))


def translate_tf(F: TFFunction, a: float, b: float) -> TFFunction:
    """(x, w) -> F(x - a, w - b) for lattice-aligned a, b (circular)."""
    g = F.grid
    ka = int(round(a / g.dx))
    kb = int(round(b / g.dw))
    if abs(a - ka * g.dx) > 1e-9 * g.dx or abs(b - kb * g.dw) > 1e-9 * g.dw:
        raise ValueError("translation must be lattice-aligned")
    return TFFunction(g, np.roll(F.samples, (ka, kb), axis=(0, 1)))
