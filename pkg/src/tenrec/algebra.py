"""Dense tensor algebra built on the tube-wise circular convolution product.

A 3-way array ``A`` is treated as a stack of frontal slices ``A[:, :, k]``
whose third index runs along "tubes".  The tube-wise product of two such
arrays equals independent matrix products between the frontal slices of
their DFTs along the third mode, which is how every product here is
evaluated.  Arrays are real in the spatial domain; the Fourier-domain
slices come in conjugate pairs, so decompositions only ever factor the
first ``I3 // 2 + 1`` slices and mirror the rest.

N-way arrays enter through mode-pair unfolding: two chosen modes become
the slice axes and the remaining modes are flattened into tubes with the
earliest remaining mode varying fastest (column-major order).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# A singular tube/value counts as nonzero when it exceeds this fraction of
# the largest singular value of the whole tensor.
RANK_RTOL = 1e-8


def _require_3way(a, name="input"):
    a = np.asarray(a)
    if a.ndim != 3:
        raise ValueError(f"{name} must be a 3-way array, got shape {a.shape}")
    return a


def _check_mode_pair(ndim, mode1, mode2):
    if not (0 <= mode1 < mode2 < ndim):
        raise ValueError(
            f"mode pair ({mode1}, {mode2}) is invalid for a {ndim}-way array; "
            "need 0 <= mode1 < mode2 < ndim"
        )


def mode_pairs(ndim):
    """All mode pairs (m1, m2) with m1 < m2, in lexicographic order."""
    return list(itertools.combinations(range(ndim), 2))


def unfold_mode_pair(t, mode1, mode2):
    """Unfold an N-way array into a 3-way array for one mode pair.

    Element ``(i_1, ..., i_N)`` of ``t`` lands at position
    ``(i_mode1, i_mode2, j)`` where ``j`` enumerates the remaining modes
    with the earliest remaining mode varying fastest.

    Parameters
    ----------
    t : ndarray
        N-way array, N >= 2.
    mode1, mode2 : int
        Zero-based modes, ``mode1 < mode2``.

    Returns
    -------
    ndarray of shape (I_mode1, I_mode2, prod of remaining extents)
    """
    t = np.asarray(t)
    _check_mode_pair(t.ndim, mode1, mode2)
    rest = [m for m in range(t.ndim) if m not in (mode1, mode2)]
    moved = np.transpose(t, (mode1, mode2, *rest))
    return moved.reshape(
        (t.shape[mode1], t.shape[mode2], -1), order="F"
    ).copy()


def fold_mode_pair(t3, mode1, mode2, shape):
    """Invert :func:`unfold_mode_pair` back to the original shape."""
    shape = tuple(int(s) for s in shape)
    _check_mode_pair(len(shape), mode1, mode2)
    t3 = _require_3way(t3, "unfolded input")
    rest = [m for m in range(len(shape)) if m not in (mode1, mode2)]
    rest_extents = [shape[m] for m in rest]
    expected = (shape[mode1], shape[mode2], int(np.prod(rest_extents, dtype=np.int64)))
    if t3.shape != expected:
        raise ValueError(
            f"unfolded shape {t3.shape} is inconsistent with target shape "
            f"{shape} and pair ({mode1}, {mode2}); expected {expected}"
        )
    moved = t3.reshape((expected[0], expected[1], *rest_extents), order="F")
    inverse = np.argsort((mode1, mode2, *rest))
    return np.transpose(moved, inverse).copy()


def dft_mode3(z):
    """Unnormalised DFT along the third mode (tube direction)."""
    return np.fft.fft(_require_3way(z), axis=2)


def idft_mode3(zbar):
    """Inverse of :func:`dft_mode3` (scaled by 1/I3); output is complex."""
    return np.fft.ifft(_require_3way(zbar), axis=2)


def t_product(a, b):
    """Tube-wise circular convolution product of two 3-way arrays.

    Parameters
    ----------
    a : ndarray, shape (I1, I2, I3)
    b : ndarray, shape (I2, J, I3)

    Returns
    -------
    ndarray, shape (I1, J, I3)
        Real when both inputs are real.
    """
    a = _require_3way(a, "a")
    b = _require_3way(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner extents do not match: {a.shape} vs {b.shape}")
    if a.shape[2] != b.shape[2]:
        raise ValueError(f"tube lengths do not match: {a.shape} vs {b.shape}")
    abar = np.fft.fft(a, axis=2)
    bbar = np.fft.fft(b, axis=2)
    cbar = np.einsum("ijk,jlk->ilk", abar, bbar)
    c = np.fft.ifft(cbar, axis=2)
    if np.isrealobj(a) and np.isrealobj(b):
        return c.real
    return c


def conj_transpose(a):
    """Transpose each frontal slice and reverse the order of slices 2..I3."""
    a = _require_3way(a)
    out = np.empty((a.shape[1], a.shape[0], a.shape[2]), dtype=a.dtype)
    out[:, :, 0] = a[:, :, 0].conj().T
    if a.shape[2] > 1:
        out[:, :, 1:] = a[:, :, :0:-1].conj().transpose(1, 0, 2)
    return out


def identity_tensor(n, tubes):
    """Identity for the tube-wise product: eye in slice 0, zeros elsewhere."""
    out = np.zeros((n, n, tubes))
    out[:, :, 0] = np.eye(n)
    return out


def _half_slices(i3):
    # Slices 0..half-1 determine a conjugate-symmetric stack.
    return i3 // 2 + 1


def _mirror_fourier(stack_half, i3):
    """Extend per-slice Fourier data from the first half to all I3 slices."""
    full = np.empty(stack_half.shape[:-1] + (i3,), dtype=stack_half.dtype)
    half = stack_half.shape[-1]
    full[..., :half] = stack_half
    for k in range(half, i3):
        full[..., k] = stack_half[..., i3 - k].conj()
    return full


def fourier_singular_values(z):
    """Per-Fourier-slice singular values of a 3-way array.

    Returns an ``(R, I3)`` matrix with ``R = min(I1, I2)``; each column is
    non-increasing.  Only the first ``I3 // 2 + 1`` slices are factored,
    the rest are conjugate mirrors with identical singular values.
    """
    z = _require_3way(z)
    i3 = z.shape[2]
    zbar = np.fft.fft(z, axis=2)
    half = _half_slices(i3)
    vals_half = np.linalg.svd(np.moveaxis(zbar[:, :, :half], 2, 0), compute_uv=False)
    vals = np.empty((i3, vals_half.shape[1]))
    vals[:half] = vals_half
    for k in range(half, i3):
        vals[k] = vals_half[i3 - k]
    return vals.T


@dataclass
class TubalFactorization:
    """Orthogonal-diagonal-orthogonal factorization under the tube product.

    ``u`` is I1 x I1 x I3, ``s`` is I1 x I2 x I3 with diagonal frontal
    slices in both domains, ``v`` is I2 x I2 x I3, and the original array
    is ``u * s * conj_transpose(v)``.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def compose(self):
        """Multiply the factors back together."""
        return t_product(t_product(self.u, self.s), conj_transpose(self.v))


def t_svd(z):
    """Factor a real 3-way array as ``u * s * v^H``.

    Each Fourier-domain frontal slice is factored by a complex SVD with
    singular values sorted non-increasing; slices past ``I3 // 2 + 1`` are
    conjugate mirrors of earlier ones and are not factored again.

    Raises
    ------
    ValueError
        If the input is not 3-way or contains non-finite entries.
    """
    z = np.asarray(z, dtype=float)
    z = _require_3way(z)
    if not np.all(np.isfinite(z)):
        raise ValueError("t_svd input must be finite")
    i1, i2, i3 = z.shape
    zbar = np.fft.fft(z, axis=2)
    half = _half_slices(i3)

    ubar_h = np.empty((i1, i1, half), dtype=complex)
    sbar_h = np.zeros((i1, i2, half), dtype=complex)
    vbar_h = np.empty((i2, i2, half), dtype=complex)
    r = min(i1, i2)
    for k in range(half):
        u, s, vh = np.linalg.svd(zbar[:, :, k], full_matrices=True)
        ubar_h[:, :, k] = u
        sbar_h[:r, :r, k] = np.diag(s)
        vbar_h[:, :, k] = vh.conj().T

    ubar = _mirror_fourier(ubar_h, i3)
    sbar = _mirror_fourier(sbar_h, i3)
    vbar = _mirror_fourier(vbar_h, i3)
    return TubalFactorization(
        u=np.fft.ifft(ubar, axis=2).real,
        s=np.fft.ifft(sbar, axis=2).real,
        v=np.fft.ifft(vbar, axis=2).real,
    )


def _rank_threshold(sigma):
    top = sigma.max(initial=0.0)
    return RANK_RTOL * top


def tubal_rank(z, rtol=None):
    """Number of nonzero singular tubes of a 3-way array."""
    sigma = fourier_singular_values(z)
    thresh = (rtol if rtol is not None else RANK_RTOL) * sigma.max(initial=0.0)
    return int(np.count_nonzero(sigma.max(axis=1) > thresh))


def multi_rank(z, rtol=None):
    """Vector of Fourier-slice matrix ranks, one entry per tube index."""
    sigma = fourier_singular_values(z)
    thresh = (rtol if rtol is not None else RANK_RTOL) * sigma.max(initial=0.0)
    return (sigma > thresh).sum(axis=0).astype(int)


def tnn(z):
    """Sum of singular values over all Fourier-domain frontal slices."""
    return float(fourier_singular_values(z).sum())


def n_tubal_rank(t, rtol=None):
    """Tubal rank of every mode-pair unfolding, in lexicographic pair order."""
    t = np.asarray(t)
    if t.ndim < 2:
        raise ValueError("n_tubal_rank needs at least a 2-way array")
    return [
        tubal_rank(unfold_mode_pair(t, m1, m2), rtol=rtol)
        for m1, m2 in mode_pairs(t.ndim)
    ]
