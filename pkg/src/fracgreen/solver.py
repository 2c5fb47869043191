"""Assemble full solutions N(x, t) from Green kernels and data.

The solution is built spectrally: transform the initial data on a padded
grid, multiply by the Fourier-side kernel per output time, transform
back.  The weakly singular source integral in time uses product
integration so the (t - tau)^(alpha - 1) factor is handled exactly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .green import GreenKind, ProblemSpec, green_hat
from .fracmath import mittag_leffler_array


class SpecValidationError(Exception):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SourceDescriptor:
    """Initial datum or source profile: a named preset or raw samples."""

    kind: str = "zero"
    center: float = 0.0
    width: float = 1.0
    lo: float = 0.0
    hi: float = 0.0
    values: np.ndarray = None

    _KINDS = ("dirac_delta", "gaussian", "box", "samples", "zero")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "samples" and self.values is None:
            raise ValueError("samples descriptor needs values")

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def delta(cls, center=0.0):
        return cls(kind="dirac_delta", center=center)

    @classmethod
    def gaussian(cls, center=0.0, width=1.0):
        return cls(kind="gaussian", center=center, width=width)

    @classmethod
    def box(cls, lo, hi):
        return cls(kind="box", lo=lo, hi=hi)

    @classmethod
    def from_samples(cls, values):
        return cls(kind="samples", values=np.asarray(values, dtype=complex))

    def render(self, x: np.ndarray, dx: float) -> np.ndarray:
        """Samples of the descriptor on the grid x (delta: unit impulse 1/dx)."""
        if self.kind == "zero":
            return np.zeros(x.size, dtype=complex)
        if self.kind == "dirac_delta":
            out = np.zeros(x.size, dtype=complex)
            j = int(np.argmin(np.abs(x - self.center)))
            out[j] = 1.0 / dx
            return out
        if self.kind == "gaussian":
            u = (x - self.center) / self.width
            return np.exp(-0.5 * u * u).astype(complex) \
                / (self.width * math.sqrt(2.0 * math.pi))
        if self.kind == "box":
            return ((x >= self.lo) & (x <= self.hi)).astype(complex)
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != x.size:
            raise ValueError(
                f"sample count {vals.size} does not match grid size {x.size}"
            )
        return vals


@dataclass(frozen=True)
class SpaceTimeGrid:
    x_min: float
    x_max: float
    nx: int
    times: tuple
    dt_oracle: float = 1.0 / 1024.0

    def __post_init__(self):
        if self.nx < 8:
            raise ValueError("nx must be at least 8")
        ts = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", ts)
        if not ts or ts[0] <= 0.0:
            raise ValueError("times must start above 0 (kernels are singular "
                             "at t = 0)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("times must be strictly increasing")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.nx)


@dataclass
class Field:
    grid: SpaceTimeGrid
    values: np.ndarray  # (n_times, nx) complex

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.grid.times), self.grid.nx):
            raise ValueError("field shape does not match grid")


def validate_spec(spec: ProblemSpec) -> ProblemSpec:
    """Return the spec unchanged, or raise with every violated constraint."""
    probs = spec.violations()
    if probs:
        raise SpecValidationError(probs)
    return spec


def convolve_space(a, b, dx: float) -> np.ndarray:
    """Linear convolution scaled by dx, origin at index 0, output length n."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("sequences must be 1-d and of equal length")
    from scipy.signal import fftconvolve
    return fftconvolve(a, b)[: a.size] * dx


def convolve_time_singular(kernel_values, alpha: float, t_index: int,
                           dt: float) -> np.ndarray:
    """Int_0^t (t - tau)^(alpha - 1) S(tau) dtau by product integration.

    kernel_values[j] holds the smooth factor S at tau = j dt (scalar or
    vector); it is interpolated linearly on each step while the singular
    power is integrated exactly, so constants are reproduced exactly and
    smooth integrands converge at O(dt^2).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (0, 2]")
    S = np.asarray(kernel_values, dtype=complex)
    n = t_index
    if n == 0:
        return np.zeros_like(S[0])
    if S.shape[0] < n + 1:
        raise ValueError("need smooth-factor samples at tau = 0..t")
    t = n * dt
    j = np.arange(n)
    uj = t - j * dt          # upper u on each sub-interval
    uj1 = t - (j + 1) * dt   # lower u
    m0 = (uj ** alpha - uj1 ** alpha) / alpha
    m1 = (uj ** (alpha + 1.0) - uj1 ** (alpha + 1.0)) / (alpha + 1.0)
    w_lo = m0 - (uj * m0 - m1) / dt      # weight of S_j   (tau side)
    w_hi = (uj * m0 - m1) / dt           # weight of S_{j+1}
    shape = (n,) + (1,) * (S.ndim - 1)
    acc = (S[:n] * w_lo.reshape(shape)).sum(axis=0) \
        + (S[1:n + 1] * w_hi.reshape(shape)).sum(axis=0)
    return acc


def _padded_wavenumbers(grid: SpaceTimeGrid):
    """Padded mode count and wavenumbers matching the transform convention.

    With f_hat(k) = Int exp(+ikx) f dx, the FFT bin m carries
    k_m = -2 pi fftfreq(M, dx)[m].
    """
    M = 1
    while M < 4 * grid.nx:
        M *= 2
    k = -2.0 * math.pi * np.fft.fftfreq(M, d=grid.dx)
    return M, k


def _window_mass_warning(ghat, M, nx):
    """Warn when the kernel carries noticeable mass near the alias boundary.

    The padded ring leaves (M - nx)/2 grid offsets of slack on either
    side; kernel mass beyond half that slack is about to wrap onto the
    window and corrupt the convolution.
    """
    h = np.abs(np.fft.ifft(ghat))
    offs = np.minimum(np.arange(M), M - np.arange(M))
    far = h[offs > (M - nx) // 2].sum()
    tot = max(h.sum(), 1e-300)
    if far / tot > 1e-3:
        warnings.warn(
            "kernel mass outside the spatial window exceeds 1e-3; "
            "widen the grid", stacklevel=3
        )


def solve(spec: ProblemSpec, f: SourceDescriptor, g: SourceDescriptor,
          U: SourceDescriptor, grid: SpaceTimeGrid, n_time_sub: int = 256,
          fundamental: bool = False) -> Field:
    """Solution field from initial data f (and g for alpha > 1) plus source U.

    U is read as a fixed spatial profile switched on at t = 0; its time
    integral against the singular kernel uses product integration on
    n_time_sub steps per output time.  fundamental replaces f by a unit
    impulse so the output is the Green function itself.
    """
    validate_spec(spec)
    a = spec.alpha
    high = a > 1.0
    if g.kind != "zero" and not high:
        raise SpecValidationError(
            ["second initial datum g requires the 1 < alpha <= 2 regime"])
    self_coupled = spec.source_coupling == "self"
    if self_coupled and U.kind != "zero":
        raise SpecValidationError(
            ["self-coupled (two-operator) problems admit no external source"])
    if U.kind == "dirac_delta":
        raise SpecValidationError(["delta source U is not supported"])

    if fundamental:
        f = SourceDescriptor.delta(center=0.0)

    M, k = _padded_wavenumbers(grid)
    nx, dx = grid.nx, grid.dx
    x = grid.x

    def padded_fft(desc):
        col = np.zeros(M, dtype=complex)
        col[:nx] = desc.render(x, dx)
        return np.fft.fft(col)

    fhat = padded_fft(f)
    ghat_data = padded_fft(g) if g.kind != "zero" else None
    uhat = padded_fft(U) if U.kind != "zero" else None

    kind_f = GreenKind.G3 if self_coupled else GreenKind.G
    kind_g = GreenKind.G4 if self_coupled else GreenKind.G2

    out = np.empty((len(grid.times), nx), dtype=complex)
    src_sign = -1.0 if spec.source_mode == "riesz_feller" else 1.0

    psi_b = None
    if uhat is not None:
        from .operators import riesz_feller_symbol
        m_S = riesz_feller_symbol(spec.source_symbol(), k) \
            if spec.source_mode == "riesz_feller" else np.ones(M, dtype=complex)
        psi_b = riesz_feller_symbol(spec.space_symbol(), k)

    for it, t in enumerate(grid.times):
        gh = green_hat(kind_f, k, t, spec)
        # the localization heuristic only makes sense for dissipative
        # kernels; dispersive (imaginary-coefficient) ones never localize
        if it == len(grid.times) - 1 and spec.lam.real > 0.0:
            _window_mass_warning(gh, M, nx)
        nhat = fhat * gh
        if ghat_data is not None:
            nhat = nhat + ghat_data * green_hat(kind_g, k, t, spec)
        if uhat is not None:
            # S(tau) = m_S E_aa(-lam Psi (t-tau)^a) u_hat, sampled on a
            # uniform sub-grid and convolved against (t-tau)^(a-1)
            dts = t / n_time_sub
            taus = dts * np.arange(n_time_sub + 1)
            w = t - taus
            ml = mittag_leffler_array(
                a, a, -np.outer(w ** a, spec.lam * psi_b))
            S = ml * (m_S * uhat)[None, :]
            nhat = nhat + src_sign * spec.mu \
                * convolve_time_singular(S, a, n_time_sub, dts)
        out[it] = np.fft.ifft(nhat)[:nx]
    return Field(grid=grid, values=out)
