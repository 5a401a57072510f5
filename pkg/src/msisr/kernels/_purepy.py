"""Pure-numpy implementations of the hot kernels.

Each function mirrors the compiled kernel in ``_native.pyx`` operation for
operation: per output element the floating-point additions happen in the
same order, so the two backends produce bit-identical results.  Keep the
two files in sync when changing either.
"""

import numpy as np

BACKEND = "python"


def block_average_core(x, factor):
    """Mean over each factor x factor block, summed in row-major order."""
    rows, cols = x.shape
    lr = np.zeros((rows // factor, cols // factor), dtype=np.float64)
    for i in range(factor):
        for j in range(factor):
            lr += x[i::factor, j::factor]
    return lr / (factor * factor)


def block_adjoint_core(y, factor):
    """Replicate each low-res value over its block, divided by factor**2."""
    v = y / (factor * factor)
    return np.repeat(np.repeat(v, factor, axis=0), factor, axis=1)


def block_gram_core(x, factor):
    """Fused adjoint(average(x)): block mean, divided by factor**2, broadcast."""
    rows, cols = x.shape
    s = np.zeros((rows // factor, cols // factor), dtype=np.float64)
    for i in range(factor):
        for j in range(factor):
            s += x[i::factor, j::factor]
    m = s / (factor * factor)
    g = m / (factor * factor)
    return np.repeat(np.repeat(g, factor, axis=0), factor, axis=1)


def gather_axis0(x, idx, w):
    """out[i, :] = sum_t w[i, t] * x[idx[i, t], :], taps accumulated in order."""
    out = w[:, 0][:, None] * x[idx[:, 0], :]
    for t in range(1, idx.shape[1]):
        out += w[:, t][:, None] * x[idx[:, t], :]
    return out


def gather_axis1(x, idx, w):
    """out[:, j] = sum_t w[j, t] * x[:, idx[j, t]], taps accumulated in order."""
    out = w[:, 0][None, :] * x[:, idx[:, 0]]
    for t in range(1, idx.shape[1]):
        out += w[:, t][None, :] * x[:, idx[:, t]]
    return out


def cholesky_solve_inplace(chol_lower, b):
    """Solve (L L^T) z = b row-wise for a small lower factor, overwriting b.

    b has shape (n, k); each row is an independent right-hand side.
    """
    k = chol_lower.shape[0]
    for c in range(k):
        for j in range(c):
            b[:, c] -= chol_lower[c, j] * b[:, j]
        b[:, c] /= chol_lower[c, c]
    for c in range(k - 1, -1, -1):
        for j in range(c + 1, k):
            b[:, c] -= chol_lower[j, c] * b[:, j]
        b[:, c] /= chol_lower[c, c]
    return b
