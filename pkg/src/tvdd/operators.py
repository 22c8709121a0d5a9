"""Linear measurement operators ``T: R^{N_1 x ... x N_d} -> R^K``."""

import numpy as np

from .grid import GridShape


class DegenerateProblemError(ValueError):
    """Raised for problems the solvers must refuse (zero operator, 1 in ker T)."""


class MeasurementOperator:
    """Base class: a real linear map with adjoint and a scalar prefactor."""

    def __init__(self, shape, scale=1.0):
        self.domain_shape = GridShape(shape)
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    @property
    def shape(self):
        return self.domain_shape.dims

    @property
    def range_dim(self):
        raise NotImplementedError

    def apply(self, u):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def normal(self, u):
        return self.adjoint(self.apply(u))

    def scaled(self, c):
        """Copy of this operator multiplied by ``c``."""
        raise NotImplementedError

    def _check_signal(self, u):
        u = np.asarray(u, dtype=np.float64)
        if u.shape != self.shape:
            raise ValueError(f"signal of shape {u.shape} does not match operator domain {self.shape}")
        return u

    def _check_data(self, y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.range_dim,):
            raise ValueError(f"data of shape {y.shape}, expected ({self.range_dim},)")
        return y


class MaskOperator(MeasurementOperator):
    """Restriction to a set of observed grid points, times ``scale``.

    ``mask=None`` observes every point, which gives ``scale`` times the
    identity (returned as a flat vector).
    """

    def __init__(self, shape, mask=None, scale=1.0):
        super().__init__(shape, scale)
        if mask is None:
            mask = np.ones(self.shape, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise ValueError("mask shape does not match grid")
        self.mask = mask
        self._k = int(mask.sum())

    @property
    def range_dim(self):
        return self._k

    def apply(self, u):
        return self.scale * self._check_signal(u)[self.mask]

    def adjoint(self, y):
        y = self._check_data(y)
        out = np.zeros(self.shape)
        out[self.mask] = self.scale * y
        return out

    def normal(self, u):
        return np.where(self.mask, self.scale**2 * self._check_signal(u), 0.0)

    def scaled(self, c):
        return MaskOperator(self.shape, self.mask, self.scale * c)

    def __repr__(self):
        return f"MaskOperator(shape={self.shape}, observed={self._k}, scale={self.scale:g})"


def identity(shape, scale=1.0):
    return MaskOperator(shape, None, scale)


class PartialFourierOperator(MeasurementOperator):
    """Unitary DFT sampled on a frequency set, stacked as ``[real, imag]``.

    ``freq_mask`` is a boolean array in numpy FFT index order. Because the
    signal is real, sampling ``k`` also determines ``-k``; masks built by
    :func:`fourier_sampling_mask` are closed under ``k -> -k``, so the data
    carry redundant conjugate pairs. That is harmless for the least-squares
    term and keeps the adjoint a plain real part.
    """

    def __init__(self, shape, freq_mask=None, scale=1.0):
        super().__init__(shape, scale)
        if freq_mask is None:
            freq_mask = np.ones(self.shape, dtype=bool)
        freq_mask = np.asarray(freq_mask, dtype=bool)
        if freq_mask.shape != self.shape:
            raise ValueError("frequency mask shape does not match grid")
        self.freq_mask = freq_mask
        self._m = int(freq_mask.sum())

    @property
    def range_dim(self):
        return 2 * self._m

    def apply(self, u):
        coef = np.fft.fftn(self._check_signal(u), norm="ortho")[self.freq_mask]
        return self.scale * np.concatenate([coef.real, coef.imag])

    def adjoint(self, y):
        y = self._check_data(y)
        coef = np.zeros(self.shape, dtype=complex)
        coef[self.freq_mask] = y[: self._m] + 1j * y[self._m :]
        return self.scale * np.fft.ifftn(coef, norm="ortho").real

    def scaled(self, c):
        return PartialFourierOperator(self.shape, self.freq_mask, self.scale * c)

    def __repr__(self):
        return f"PartialFourierOperator(shape={self.shape}, sampled={self._m}, scale={self.scale:g})"


def estimate_norm(T, iters=50, seed=0):
    """Largest singular value of ``T`` by power iteration on ``T* T``."""
    if iters < 10:
        raise ValueError("use at least 10 power iterations")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(T.shape)
    u /= np.linalg.norm(u)
    rayleigh = 0.0
    for _ in range(iters):
        v = T.normal(u)
        rayleigh = float(np.vdot(u, v))
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        u = v / nv
    return float(np.sqrt(max(rayleigh, 0.0)))


def normalize_problem(T, g, alpha, target=0.9, iters=100):
    """Rescale so that ``||T'|| = target``.

    With ``c = target / ||T||`` this returns ``(c T, c g, c^2 alpha)``; the
    objective is multiplied by ``c^2`` and its minimizers do not move.
    """
    nrm = estimate_norm(T, iters)
    if nrm == 0.0:
        raise DegenerateProblemError("operator is zero")
    c = target / nrm
    return T.scaled(c), c * np.asarray(g, dtype=np.float64), c * c * alpha


def check_kernel_condition(T):
    """True when constants are not annihilated by ``T``."""
    one = np.ones(T.shape)
    return bool(np.linalg.norm(T.apply(one)) > 1e-12 * np.linalg.norm(one))


def fourier_sampling_mask(shape, fraction, low_block=8, seed=0):
    """Seeded frequency set: zero frequency, a low-frequency block, random rest.

    The block covers frequencies with ``-low_block/2 <= k_i < low_block/2``
    along every axis. Remaining frequencies are drawn uniformly (with a
    ``numpy`` generator seeded by ``seed``) until the set holds
    ``round(fraction * size)`` entries. The set is closed under ``k -> -k``.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("sampling fraction must lie in (0, 1]")
    shape = tuple(int(n) for n in shape)
    size = int(np.prod(shape))
    target = int(round(fraction * size))
    mask = np.zeros(shape, dtype=bool)

    def add(idx):
        mirror = tuple((-i) % n for i, n in zip(idx, shape))
        fresh = int(not mask[idx]) + int(mirror != idx and not mask[mirror])
        mask[idx] = mask[mirror] = True
        return fresh

    count = add(tuple(0 for _ in shape))
    if low_block > 0:
        half = low_block // 2
        ranges = [np.arange(-half, low_block - half) % n for n in shape]
        for idx in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, len(shape)):
            count += add(tuple(int(i) for i in idx))
    rng = np.random.default_rng(seed)
    order = rng.permutation(size)
    for flat in order:
        if count >= target:
            break
        count += add(tuple(int(i) for i in np.unravel_index(flat, shape)))
    return mask
