"""Bounded linear operators with certified norm bounds.

Every operator used by the iteration carries a certified upper bound on
its spectral norm; the iteration theory needs that bound below 1, and
:func:`renormalize` rescales an arbitrary problem so it is. The concrete
kinds are diagonal maps, dense matrices, zero-padded FFT convolutions on
2-d grids, and frame synthesis maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.fft

from .core import CoefficientVector
from .errors import AlignmentError, ContractViolationError, ParameterError
from .shrinkage import soft_threshold

__all__ = [
    "LinearOperatorHandle",
    "DiagonalOperator",
    "DenseOperator",
    "Convolution2DOperator",
    "FrameSynthesisOperator",
    "ScaledOperator",
    "convolution_operator",
    "frame_synthesis_operator",
    "estimate_norm",
    "renormalize",
    "RenormalizedProblem",
    "validate_operator",
    "SvdModel",
    "thresholded_svd_solve",
]

# safety factor applied to power-method estimates before they are used
# as certified upper bounds
_NORM_SAFETY = 1.01


class LinearOperatorHandle:
    """Base class: a linear map with apply, adjoint, and a norm bound.

    Attributes
    ----------
    kind : str
        Payload tag ("diagonal", "dense", "convolution", ...).
    domain_len, image_len : int
        Lengths of flat input and output vectors.
    norm_bound : float
        Certified upper bound on the spectral norm. May be >= 1 at
        construction; the solver refuses such operators unless a
        dominating preconditioner is supplied.
    domain_dims : tuple or None
        Grid shape of the domain for image-valued operators.
    """

    kind = "abstract"

    def __init__(self, domain_len: int, image_len: int, norm_bound: float,
                 domain_dims: Optional[Tuple[int, ...]] = None,
                 domain_dtype=np.float64):
        if domain_len < 1 or image_len < 1:
            raise ParameterError("operator dimensions must be >= 1")
        norm_bound = float(norm_bound)
        if not np.isfinite(norm_bound) or norm_bound < 0.0:
            raise ParameterError("norm bound must be finite and nonnegative")
        self.domain_len = int(domain_len)
        self.image_len = int(image_len)
        self.norm_bound = norm_bound
        self.domain_dims = domain_dims
        self.domain_dtype = domain_dtype

    def _check_domain(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.ndim > 1:
            f = f.ravel()
        if f.shape != (self.domain_len,):
            raise AlignmentError(
                f"operator domain has length {self.domain_len}, got {f.size}"
            )
        return f

    def _check_image(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g)
        if g.ndim > 1:
            g = g.ravel()
        if g.shape != (self.image_len,):
            raise AlignmentError(
                f"operator image has length {self.image_len}, got {g.size}"
            )
        return g

    def apply(self, f) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, g) -> np.ndarray:
        raise NotImplementedError


class DiagonalOperator(LinearOperatorHandle):
    """Componentwise multiplication by a fixed sequence."""

    kind = "diagonal"

    def __init__(self, entries):
        entries = np.asarray(entries)
        if entries.ndim != 1 or entries.size == 0:
            raise ParameterError("diagonal entries must form a nonempty 1-d sequence")
        if not np.all(np.isfinite(entries)):
            raise ParameterError("diagonal entries must be finite")
        self.entries = entries
        dtype = np.complex128 if entries.dtype.kind == "c" else np.float64
        super().__init__(entries.size, entries.size,
                         float(np.max(np.abs(entries))), domain_dtype=dtype)

    def apply(self, f):
        return self.entries * self._check_domain(f)

    def adjoint(self, g):
        return np.conj(self.entries) * self._check_image(g)


class DenseOperator(LinearOperatorHandle):
    """Explicit matrix; norm bound from an exact spectral norm."""

    kind = "dense"

    def __init__(self, matrix, norm_bound: Optional[float] = None):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.size == 0:
            raise ParameterError("dense operator needs a nonempty 2-d matrix")
        if not np.all(np.isfinite(matrix)):
            raise ParameterError("matrix entries must be finite")
        self.matrix = matrix
        if norm_bound is None:
            # exact up to roundoff; tiny inflation keeps it an upper bound
            norm_bound = float(np.linalg.norm(matrix, 2)) * (1.0 + 1e-12)
        dtype = np.complex128 if matrix.dtype.kind == "c" else np.float64
        super().__init__(matrix.shape[1], matrix.shape[0], norm_bound,
                         domain_dtype=dtype)

    def apply(self, f):
        return self.matrix @ self._check_domain(f)

    def adjoint(self, g):
        return self.matrix.conj().T @ self._check_image(g)


class ScaledOperator(LinearOperatorHandle):
    """A fixed multiple of another operator (used by renormalize)."""

    kind = "scaled"

    def __init__(self, base: LinearOperatorHandle, factor: float, norm_bound: float):
        self.base = base
        self.factor = float(factor)
        super().__init__(base.domain_len, base.image_len, norm_bound,
                         domain_dims=base.domain_dims,
                         domain_dtype=base.domain_dtype)

    def apply(self, f):
        return self.factor * self.base.apply(f)

    def adjoint(self, g):
        return self.factor * self.base.adjoint(g)


class Convolution2DOperator(LinearOperatorHandle):
    """Low-pass filtering of a 2-d grid through zero-padded FFTs.

    The frequency response is the autocorrelation of the indicator of a
    disk whose radius is ``radius_fraction`` times the maximum (Nyquist)
    frequency of the padded grid, scaled so the peak response equals
    ``peak_response``. The peak response is then an exact norm bound:
    padding and cropping are partial isometries around a multiplication
    operator in an orthogonal basis.

    Input and output are flat vectors of length grid[0]*grid[1]; the
    point spread function is nonnegative (an intensity pattern), so the
    map preserves nonnegativity up to roundoff.
    """

    kind = "convolution"

    def __init__(self, grid: Tuple[int, int], pad: Tuple[int, int],
                 radius_fraction: float = 0.1, peak_response: float = 0.999):
        grid = (int(grid[0]), int(grid[1]))
        pad = (int(pad[0]), int(pad[1]))
        if grid[0] < 1 or grid[1] < 1:
            raise ParameterError("grid must be at least 1x1")
        if pad[0] < grid[0] or pad[1] < grid[1]:
            raise ParameterError("padded shape must dominate the grid shape")
        if not (0.0 < radius_fraction <= 1.0):
            raise ParameterError("radius_fraction must lie in (0, 1]")
        if not (0.0 < peak_response):
            raise ParameterError("peak_response must be positive")
        self.grid = grid
        self.pad = pad
        self.radius_fraction = float(radius_fraction)
        self.peak_response = float(peak_response)

        fy = np.fft.fftfreq(pad[0])
        fx = np.fft.fftfreq(pad[1])
        radius = radius_fraction * 0.5  # max frequency is the Nyquist 0.5
        disk = (fy[:, None] ** 2 + fx[None, :] ** 2) <= radius**2
        if not disk.any():
            raise ParameterError("frequency disk is empty; enlarge pad or radius")
        spectrum = np.abs(np.fft.fft2(disk.astype(np.float64))) ** 2
        autocorr = np.fft.ifft2(spectrum).real
        self.filter = peak_response * autocorr / autocorr.max()
        # real input path: keep only the non-redundant half spectrum
        self._rfilter = self.filter[:, : pad[1] // 2 + 1].copy()
        super().__init__(grid[0] * grid[1], grid[0] * grid[1], self.peak_response,
                         domain_dims=grid)

    def _convolve(self, f: np.ndarray) -> np.ndarray:
        padded = np.zeros(self.pad, dtype=np.float64)
        padded[: self.grid[0], : self.grid[1]] = f.reshape(self.grid)
        spectrum = scipy.fft.rfft2(padded)
        spectrum *= self._rfilter
        out = scipy.fft.irfft2(spectrum, s=self.pad)
        return out[: self.grid[0], : self.grid[1]].ravel()

    def apply(self, f):
        return self._convolve(self._check_domain(f).astype(np.float64, copy=False))

    def adjoint(self, g):
        # the frequency response is real and even, so the operator is
        # self-adjoint
        return self._convolve(self._check_image(g).astype(np.float64, copy=False))

    def point_spread_function(self) -> np.ndarray:
        """Spatial response to a unit impulse, centered on the padded grid."""
        return np.fft.fftshift(np.fft.ifft2(self.filter).real)


class FrameSynthesisOperator(LinearOperatorHandle):
    """Map a coefficient sequence to the weighted sum of frame vectors.

    apply(z) = sum_n z_n psi_n; the adjoint returns the analysis
    coefficients (<v, psi_n>)_n. The exact spectral norm is computed from
    the stacked vectors; with ``renormalize=True`` (default) the vectors
    are scaled so the certified bound stays below 1 and the applied scale
    is recorded.
    """

    kind = "frame"

    def __init__(self, frame_vectors, renormalize: bool = True, target: float = 0.999):
        vectors = np.asarray(frame_vectors)
        if vectors.ndim != 2 or vectors.size == 0:
            raise ParameterError(
                "frame vectors must form a nonempty 2-d array (n_vectors, dim)"
            )
        if not np.all(np.isfinite(vectors)):
            raise ParameterError("frame vectors must be finite")
        matrix = vectors.T.copy()  # (dim, n_vectors)
        exact = float(np.linalg.norm(matrix, 2))
        if exact == 0.0:
            raise ParameterError("frame of zero vectors has no usable normalization")
        scale = 1.0
        if renormalize and exact >= target:
            scale = exact / target
            matrix = matrix / scale
            exact = target
        self.matrix = matrix
        self.scale = scale
        dtype = np.complex128 if matrix.dtype.kind == "c" else np.float64
        super().__init__(matrix.shape[1], matrix.shape[0],
                         exact * (1.0 + 1e-12), domain_dtype=dtype)

    def apply(self, z):
        return self.matrix @ self._check_domain(z)

    def adjoint(self, v):
        return self.matrix.conj().T @ self._check_image(v)


def convolution_operator(grid, pad, radius_fraction: float = 0.1,
                         peak_response: float = 0.999) -> Convolution2DOperator:
    """Build the padded-FFT low-pass convolution operator on a 2-d grid."""
    return Convolution2DOperator(grid, pad, radius_fraction, peak_response)


def frame_synthesis_operator(frame_vectors, renormalize: bool = True) -> FrameSynthesisOperator:
    """Build a synthesis operator from explicit frame vectors."""
    return FrameSynthesisOperator(frame_vectors, renormalize=renormalize)


def estimate_norm(K: LinearOperatorHandle, iterations: int = 100, seed: int = 0) -> float:
    """Power-method estimate of ||K|| times a 1.01 safety margin.

    Deterministic for a fixed seed. The raw power estimate approaches the
    true norm from below; the margin turns it into a practical upper
    bound witness.
    """
    if iterations < 1:
        raise ParameterError("power method needs at least one iteration")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(K.domain_len)
    if np.dtype(K.domain_dtype).kind == "c":
        v = v + 1j * rng.standard_normal(K.domain_len)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = np.ones(K.domain_len)
        nv = np.linalg.norm(v)
    v = v / nv
    estimate = 0.0
    for _ in range(iterations):
        w = K.adjoint(K.apply(v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        estimate = nw
        v = w / nw
    return float(np.sqrt(estimate)) * _NORM_SAFETY


class RenormalizedProblem(NamedTuple):
    """Rescaled operator/data pair; divide mu by scale**2 to match."""

    operator: LinearOperatorHandle
    data: np.ndarray
    scale: float

    @property
    def mu_scale(self) -> float:
        return 1.0 / self.scale**2


def renormalize(K: LinearOperatorHandle, g, target: float = 0.999,
                iterations: int = 100, seed: int = 0) -> RenormalizedProblem:
    """Rescale (K, g) so the certified norm bound is at most ``target``.

    Minimizing ||K'f - g'||^2 + (mu/scale^2) * penalty(f) over the
    returned pair reproduces the minimizer of the original problem. An
    operator already certified below target passes through unchanged.
    """
    if not (0.0 < target < 1.0):
        raise ParameterError("renormalization target must lie in (0, 1)")
    g = np.asarray(g)
    estimate = estimate_norm(K, iterations=iterations, seed=seed)
    if estimate == 0.0:
        raise ParameterError("cannot renormalize an operator that annihilates probes")
    if estimate <= target:
        return RenormalizedProblem(K, g, 1.0)
    scale = estimate / target
    scaled = ScaledOperator(K, 1.0 / scale, norm_bound=target)
    return RenormalizedProblem(scaled, g / scale, scale)


def validate_operator(K: LinearOperatorHandle, n_probes: int = 20, seed: int = 0,
                      tol: float = 1e-10) -> dict:
    """Probe the adjoint pairing and the norm bound with random vectors.

    Raises ContractViolationError if <Kf, g> != <f, K*g> beyond ``tol``
    (relative) or ||Kf|| exceeds norm_bound * ||f|| beyond roundoff slack.
    Returns the worst observed defects for reporting.
    """
    rng = np.random.default_rng(seed)
    complex_domain = np.dtype(K.domain_dtype).kind == "c"

    def draw(n):
        v = rng.standard_normal(n)
        if complex_domain:
            v = v + 1j * rng.standard_normal(n)
        return v

    worst_adjoint = 0.0
    worst_excess = 0.0
    for _ in range(n_probes):
        f = draw(K.domain_len)
        g = draw(K.image_len)
        kf = K.apply(f)
        kg = K.adjoint(g)
        lhs = np.vdot(g, kf)
        rhs = np.vdot(kg, f)
        scale = max(abs(lhs), abs(rhs), 1.0)
        defect = abs(lhs - rhs) / scale
        worst_adjoint = max(worst_adjoint, defect)
        if defect > tol:
            raise ContractViolationError(
                f"adjoint pairing defect {defect:.3e} exceeds {tol:.1e}"
            )
        nf = np.linalg.norm(f)
        excess = float(np.linalg.norm(kf) - K.norm_bound * nf)
        worst_excess = max(worst_excess, excess)
        if excess > tol * max(1.0, nf):
            raise ContractViolationError(
                f"norm bound {K.norm_bound} violated by {excess:.3e} on a probe"
            )
    return {"worst_adjoint_defect": worst_adjoint, "worst_norm_excess": worst_excess}


@dataclass(frozen=True)
class SvdModel:
    """Operator given diagonally by its singular values.

    Coefficients live in the right singular basis and data in the left
    one, so apply is componentwise multiplication by sigma. Values must
    be nonincreasing, nonnegative, and below 1 (renormalize first).
    """

    singular_values: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.singular_values, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise ParameterError("singular values must form a nonempty 1-d sequence")
        if not np.all(np.isfinite(s)) or np.any(s < 0.0):
            raise ParameterError("singular values must be finite and nonnegative")
        if np.any(np.diff(s) > 0.0):
            raise ParameterError("singular values must be nonincreasing")
        if s[0] >= 1.0:
            raise ParameterError("singular values must lie below 1; renormalize first")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "singular_values", s)

    def operator(self) -> DiagonalOperator:
        return DiagonalOperator(self.singular_values)

    def __len__(self) -> int:
        return self.singular_values.size


def thresholded_svd_solve(model: SvdModel, g, mu: float) -> CoefficientVector:
    """Closed-form minimizer for p = 1, uniform weights, diagonal operator.

    Componentwise f_k = sigma_k^(-2) * S_mu(sigma_k * g_k), with
    components belonging to vanished singular values set to zero. This is
    the sparse analogue of the Tikhonov filter sigma/(sigma^2 + mu): a
    soft spectral cutoff instead of a smooth damping.
    """
    mu = float(mu)
    if not np.isfinite(mu) or mu <= 0.0:
        raise ParameterError(f"mu must be positive, got {mu}")
    g = np.asarray(g, dtype=np.float64)
    s = model.singular_values
    if g.shape != s.shape:
        raise AlignmentError("data coefficients must align with the singular values")
    out = np.zeros_like(g)
    nz = s > 0.0
    out[nz] = soft_threshold(s[nz] * g[nz], mu) / s[nz] ** 2
    return CoefficientVector(values=out)
