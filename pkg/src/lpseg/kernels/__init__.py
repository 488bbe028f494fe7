"""Backend-dispatched kernels (see :mod:`lpseg.backend`)."""

from .. import backend


def _impl():
    if backend.use_numba():
        from . import numba_impl

        return numba_impl
    from . import numpy_impl

    return numpy_impl


def hsv_planes(rgb):
    return _impl().hsv_planes(rgb)


def window_mean_std(plane):
    return _impl().window_mean_std(plane)


def kd_query_range(*args):
    return _impl().kd_query_range(*args)
