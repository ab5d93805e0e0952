# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy coincidence matching; see _kernels_py for the reference loop."""
import numpy as np

from libc.math cimport fabs


def greedy_match(const double[::1] ta, const double[::1] tb, double window):
    """Pair time-sorted A and B events, earliest A first, nearest unused B.

    Returns index arrays into ``ta`` and ``tb``.  |tb - ta| <= window, ties go
    to the earlier B event and each B event is used at most once.
    """
    cdef Py_ssize_t na = ta.shape[0], nb = tb.shape[0]
    cdef Py_ssize_t i, j, lo = 0, best, k = 0
    cdef double t, d, bestd
    used_arr = np.zeros(nb, dtype=np.uint8)
    out_a = np.empty(min(na, nb), dtype=np.intp)
    out_b = np.empty(min(na, nb), dtype=np.intp)
    cdef unsigned char[::1] used = used_arr
    cdef Py_ssize_t[::1] oa = out_a
    cdef Py_ssize_t[::1] ob = out_b
    with nogil:
        for i in range(na):
            t = ta[i]
            # B events before t - window can never match a later A event
            while lo < nb and (used[lo] or tb[lo] < t - window):
                lo += 1
            best = -1
            bestd = 0.0
            j = lo
            while j < nb and tb[j] <= t + window:
                if not used[j]:
                    d = fabs(tb[j] - t)
                    if best < 0 or d < bestd:
                        best = j
                        bestd = d
                j += 1
            if best >= 0:
                used[best] = 1
                oa[k] = i
                ob[k] = best
                k += 1
    return out_a[:k], out_b[:k]
