"""Input checking helpers shared by the public functions."""
import numpy as np

from .exceptions import DimensionError, NotSymmetricError

SYMMETRY_RTOL = 1e-12


def check_vector(v, size=None, name="vector"):
    """Return ``v`` as a finite 1-D float array, optionally of a given length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_square(X, name="matrix"):
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_symmetric(X, name="matrix"):
    """Validate near-symmetry and return the exactly symmetrized copy."""
    arr = check_square(X, name)
    scale = max(1.0, float(np.linalg.norm(arr)))
    if np.linalg.norm(arr - arr.T) > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


def check_index(j, m, name="j", low=1):
    """Validate an integer index in ``[low, m]``."""
    if isinstance(j, bool) or int(j) != j:
        raise TypeError(f"{name} must be an integer")
    j = int(j)
    if not low <= j <= m:
        raise IndexError(f"{name}={j} out of range [{low}, {m}]")
    return j
