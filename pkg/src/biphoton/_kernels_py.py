"""Pure-Python greedy coincidence matching, used when the extension is unavailable."""
import numpy as np


def greedy_match(ta, tb, window):
    """Pair time-sorted A and B events, earliest A first, nearest unused B.

    Returns index arrays into ``ta`` and ``tb``.  |tb - ta| <= window, ties go
    to the earlier B event and each B event is used at most once.
    """
    ta = np.asarray(ta, dtype=np.float64).tolist()
    tb = np.asarray(tb, dtype=np.float64).tolist()
    nb = len(tb)
    used = [False] * nb
    out_a, out_b = [], []
    lo = 0
    for i, t in enumerate(ta):
        while lo < nb and (used[lo] or tb[lo] < t - window):
            lo += 1
        best, bestd = -1, 0.0
        j = lo
        while j < nb and tb[j] <= t + window:
            if not used[j]:
                d = abs(tb[j] - t)
                if best < 0 or d < bestd:
                    best, bestd = j, d
            j += 1
        if best >= 0:
            used[best] = True
            out_a.append(i)
            out_b.append(best)
    return np.asarray(out_a, dtype=np.intp), np.asarray(out_b, dtype=np.intp)
