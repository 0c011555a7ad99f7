"""Uniform grids, sampled signals, discrete Lp norms and Gaussian families.

Every signal lives on a uniform lattice ``x_j = x0 + j*dx`` (``j = 0..n-1``)
and is treated as n-periodic.  The dual lattice has spacing
``dw = 1/(n*dx)`` and points ``w_k = (k - n/2)*dw``.  Integrals are Riemann
sums with cell weight ``dx**dim``.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Signal",
    "MeasurableSet",
    "make_grid",
    "conjugate",
    "as_exponent",
    "lp_norm",
    "tf_shift",
    "dilate",
    "gaussian",
    "set_measure",
    "interval_set",
    "dft",
    "idft",
    "upsample2",
    "reflect",
]


def _workers() -> int:
    value = os.environ.get("TF_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------

def as_exponent(p: float) -> float:
    """Validate a Lebesgue exponent in [1, inf] and return it as a float."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def conjugate(p: float) -> float:
    """Hoelder conjugate exponent, with 1' = inf and inf' = 1."""
    p = as_exponent(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform sampling lattice on R^dim, identical along every axis."""

    n: int
    dx: float
    x0: float
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise ValueError(f"dx must be positive, got {self.dx}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "x0", float(self.x0))

    @property
    def dw(self) -> float:
        return 1.0 / (self.n * self.dx)

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def cell(self) -> float:
        return self.dx ** self.dim

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def w(self) -> np.ndarray:
        return self.dw * (np.arange(self.n) - self.n // 2)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def origin_index(self) -> int:
        """Index of the point x = 0; the origin must be a lattice point."""
        o = -self.x0 / self.dx
        io = int(round(o))
        if abs(o - io) > 1e-9 * max(1.0, abs(o)):
            raise ValueError("grid origin x=0 is not a lattice point")
        return io

    def points(self) -> np.ndarray:
        """Coordinates as an array of shape (size, dim), row-major."""
        axes = np.meshgrid(*([self.x] * self.dim), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def dual(self) -> "Grid":
        """The frequency lattice viewed as a grid in its own right."""
        return Grid(self.n, self.dw, -self.n // 2 * self.dw, self.dim)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "n": self.n, "dx": self.dx, "x0": self.x0}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(n=int(d["n"]), dx=float(d["dx"]), x0=float(d["x0"]), dim=int(d.get("dim", 1)))


def make_grid(n: int, dx: float, centered: bool = True, x0: float = 0.0, dim: int = 1) -> Grid:
    """Build a grid; ``centered`` places it on [-n*dx/2, n*dx/2)."""
    if int(n) != n or n % 2:
        raise ValueError(f"n must be even, got {n}")
    if dx <= 0:
        raise ValueError(f"dx must be positive, got {dx}")
    if centered:
        x0 = -n * dx / 2
    return Grid(int(n), float(dx), float(x0), dim)


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# Signals and sets
# ---------------------------------------------------------------------------

def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex samples on a grid, optionally backed by a closed-form generator.

    ``generator`` maps an array of coordinates of shape (m, dim) to m complex
    values; it is what makes exact dilation possible.
    """

    grid: Grid
    samples: np.ndarray
    generator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        s = _frozen(np.asarray(self.samples).ravel())
        if s.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "Signal":
        return cls(grid, func(grid.points()), func)

    def with_samples(self, samples) -> "Signal":
        return Signal(self.grid, samples)

    def __add__(self, other: "Signal") -> "Signal":
        _same_grid(self.grid, other.grid)
        return Signal(self.grid, self.samples + other.samples)

    def __mul__(self, c) -> "Signal":
        return Signal(self.grid, self.samples * c)

    __rmul__ = __mul__

    def conj(self) -> "Signal":
        return Signal(self.grid, self.samples.conj())

    def array(self) -> np.ndarray:
        """Samples reshaped to (n,)*dim."""
        return self.samples.reshape((self.grid.n,) * self.grid.dim)


@dataclass(frozen=True, eq=False)
class MeasurableSet:
    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool).ravel()
        if m.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} mask entries, got {m.size}")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def indicator(self) -> np.ndarray:
        return self.mask.astype(float)


def interval_set(grid: Grid, intervals: Sequence[Sequence[float]]) -> MeasurableSet:
    """Union of closed intervals (d=1) or boxes (d=2).

    Cell j is [x_j, x_j + dx) and belongs to the set iff its centre lies
    inside, so grid-aligned intervals get their exact measure.  For
    ``dim == 2`` every entry is ``[[a1, b1], [a2, b2]]``.
    """
    pts = grid.points() + 0.5 * grid.dx
    mask = np.zeros(grid.size, dtype=bool)
    tol = 1e-12 * grid.dx
    for box in intervals:
        box = np.asarray(box, dtype=float).reshape(-1, 2)
        if box.shape[0] == 1 and grid.dim > 1:
            box = np.repeat(box, grid.dim, axis=0)
        if box.shape[0] != grid.dim:
            raise ValueError("box dimension does not match grid")
        inside = np.ones(grid.size, dtype=bool)
        for ax in range(grid.dim):
            a, b = sorted(box[ax])
            inside &= (pts[:, ax] >= a - tol) & (pts[:, ax] <= b + tol)
        mask |= inside
    return MeasurableSet(grid, mask)


def set_measure(S: MeasurableSet) -> float:
    return float(np.count_nonzero(S.mask)) * S.grid.cell


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def lp_norm(f, p: float) -> float:
    """Discrete Lp norm of a Signal or TFFunction with Riemann cell weights."""
    p = as_exponent(p)
    values = np.abs(np.asarray(f.samples))
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    cell = f.cell if hasattr(f, "cell") else f.grid.cell
    vmax = values.max()
    if vmax == 0:
        return 0.0
    # scale out the maximum so large p does not overflow
    s = np.sum((values / vmax) ** p) * cell
    return float(vmax * s ** (1.0 / p))


# ---------------------------------------------------------------------------
# Time-frequency shifts and dilations
# ---------------------------------------------------------------------------

def _lattice_steps(value, step: float, dim: int, what: str) -> np.ndarray:
    v = np.broadcast_to(np.asarray(value, dtype=float), (dim,))
    k = np.round(v / step)
    if np.any(np.abs(v - k * step) > 1e-9 * step):
        raise ValueError(f"{what} shift {v} is not a multiple of the lattice step {step}")
    return k.astype(int)


def tf_shift(f: Signal, a=0.0, b=0.0) -> Signal:
    """Return t -> exp(2 pi i b.t) f(t - a) for lattice-aligned a and b.

    The translation is a circular index shift.
    """
    g = f.grid
    ka = _lattice_steps(a, g.dx, g.dim, "time")
    _lattice_steps(b, g.dw, g.dim, "frequency")
    arr = np.roll(f.array(), tuple(ka), axis=tuple(range(g.dim)))
    bvec = np.broadcast_to(np.asarray(b, dtype=float), (g.dim,))
    phase = np.exp(2j * np.pi * (g.points() @ bvec))
    return Signal(g, arr.ravel() * phase)


def dilate(f: Signal, lam: float) -> Signal:
    """Samples of x -> f(lam * x); needs a closed-form generator."""
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    if f.generator is None:
        raise ValueError("dilation needs a signal with a closed-form generator")
    gen = f.generator
    return Signal.from_function(f.grid, lambda pts: gen(lam * pts))


# ---------------------------------------------------------------------------
# Gaussian family
# ---------------------------------------------------------------------------

def gaussian(kind: str, lam: float, grid: Grid, center=0.0, freq=0.0) -> Signal:
    """Gaussian family: ``h`` = exp(-pi lam |x|^2), ``Phi`` (L2-normalised)
    or ``phi`` (L1-normalised).

    Optional ``center`` and ``freq`` apply a continuous time-frequency shift
    to the closed form, so the result need not be lattice-aligned.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    d = grid.dim
    if kind == "h":
        scale = 1.0
    elif kind in ("Phi", "Φ"):
        scale = (2.0 * lam) ** (d / 4.0)
    elif kind in ("phi", "φ"):
        scale = lam ** (d / 2.0)
    else:
        raise ValueError(f"unknown Gaussian kind {kind!r}")

    c = np.broadcast_to(np.asarray(center, dtype=float), (d,))
    w = np.broadcast_to(np.asarray(freq, dtype=float), (d,))
    half = grid.length / 2
    edge = min(abs(grid.x0 - c.min()), abs(grid.x0 + grid.length - c.max()), half)
    if math.exp(-math.pi * lam * edge ** 2) > 1e-12:
        warnings.warn(
            f"grid too narrow for Gaussian lam={lam}: edge value "
            f"{math.exp(-math.pi * lam * edge ** 2):.2e} exceeds 1e-12",
            RuntimeWarning,
            stacklevel=2,
        )

    def gen(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, d)
        r2 = np.sum((pts - c) ** 2, axis=1)
        return scale * np.exp(-np.pi * lam * r2) * np.exp(2j * np.pi * (pts @ w))

    return Signal.from_function(grid, gen)


# ---------------------------------------------------------------------------
# Fourier helpers (physical-coordinate phases, d = 1 along a chosen axis)
# ---------------------------------------------------------------------------

def dft(samples: np.ndarray, grid: Grid, axis: int = -1) -> np.ndarray:
    """F(w_k) = dx * sum_j f_j exp(-2 pi i w_k x_j) along ``axis``."""
    samples = np.asarray(samples)
    shape = [1] * samples.ndim
    shape[axis] = grid.n
    phase = np.exp(-2j * np.pi * grid.w * grid.x0).reshape(shape)
    spec = sfft.fftshift(sfft.fft(samples, axis=axis, workers=_workers()), axes=axis)
    return grid.dx * phase * spec


def idft(spectrum: np.ndarray, grid: Grid, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`dft`: f_j = dw * sum_k F_k exp(2 pi i w_k x_j)."""
    spectrum = np.asarray(spectrum)
    shape = [1] * spectrum.ndim
    shape[axis] = grid.n
    phase = np.exp(2j * np.pi * grid.w * grid.x0).reshape(shape)
    vals = sfft.ifft(sfft.ifftshift(spectrum * phase, axes=axis), axis=axis, workers=_workers())
    return grid.dw * grid.n * vals


def upsample2(samples: np.ndarray, axis: int = 0) -> np.ndarray:
    """Band-limited 2x interpolation: output index i sits at x0 + i*dx/2.

    The Nyquist bin is split evenly between +/- frequencies, so real input
    stays real and the map commutes with complex conjugation.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.shape[axis]
    spec = np.moveaxis(sfft.fft(samples, axis=axis, workers=_workers()), axis, 0)
    up = np.zeros((2 * n,) + spec.shape[1:], dtype=complex)
    h = n // 2
    up[:h] = spec[:h]
    up[2 * n - h + 1:] = spec[h + 1:]
    up[h] = 0.5 * spec[h]
    up[2 * n - h] = 0.5 * spec[h]
    out = 2.0 * sfft.ifft(up, axis=0, workers=_workers())
    return np.moveaxis(out, 0, axis)


def reflect(f: Signal) -> Signal:
    """x -> f(-x) on a grid whose origin is a lattice point (d = 1)."""
    g = f.grid
    if g.dim != 1:
        raise NotImplementedError("reflection is implemented for d = 1")
    o = g.origin_index
    idx = (2 * o - np.arange(g.n)) % g.n
    return Signal(g, f.samples[idx])
