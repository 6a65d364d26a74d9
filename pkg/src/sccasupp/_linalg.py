import numpy as np

from sccasupp.errors import SqrtFailure

NEG_CLAMP = 1e-10


def sym(A):
    return (A + A.T) / 2


def psd_sqrt(A):
    """Symmetric PSD square root; eigenvalues in [-1e-10, 0] are clamped to 0."""
    w, Q = np.linalg.eigh(sym(np.asarray(A, dtype=float)))
    if w.min(initial=0.0) < -NEG_CLAMP:
        raise SqrtFailure(f"matrix has eigenvalue {w.min():.3e} < -{NEG_CLAMP:g}")
    w = np.clip(w, 0.0, None)
    return sym((Q * np.sqrt(w)) @ Q.T)


def pd_power(A, power):
    """``A**power`` for a symmetric positive definite ``A``."""
    w, Q = np.linalg.eigh(sym(np.asarray(A, dtype=float)))
    if w.min() <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return sym((Q * w**power) @ Q.T)


def sign_normalize(M):
    """Flip each column so its largest-magnitude entry is positive."""
    M = np.array(M, dtype=float, copy=True)
    if M.size == 0:
        return M
    idx = np.argmax(np.abs(M), axis=0)
    signs = np.sign(M[idx, np.arange(M.shape[1])])
    signs[signs == 0] = 1.0
    return M * signs
