import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def central_difference(fun, x, h=1e-5):
    """Gradient of a scalar function of an array by central differences."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        grad[idx] = (fun(xp) - fun(xm)) / (2.0 * h)
    return grad


def central_difference_tensor(fun, x, h=1e-5):
    """Jacobian of an array-valued function of an array, by central differences.

    Output axes are the function's output axes followed by the input axes.
    """
    x = np.asarray(x, dtype=float)
    base = np.asarray(fun(x))
    out = np.zeros(base.shape + x.shape)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        out[(...,) + idx] = (np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2.0 * h)
    return out
