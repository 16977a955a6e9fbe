"""Pure-Python twins of the compiled hot loops.

Kept arithmetically identical to ``_kernels.pyx``: the same flip-gain update,
the same acceptance rule, one uniform consumed per proposal, and the same
tie-break. Tests compare the two backends element for element.
"""

import math

import numpy as np

_CHUNK = 1 << 16


def backend_name():
    return "python"


def exhaustive_scan(lin, wsym, offset):
    """Scan all 2**n assignments of a dense QUBO.

    Same contract as the compiled version: returns ``(best_index,
    best_energy)`` with ties resolved to the lowest index. Enumerates in
    index order with vectorized chunks instead of a Gray walk.
    """
    n = lin.shape[0]
    if n > 30:
        raise ValueError("exhaustive_scan kernel supports at most 30 variables")
    wu = np.triu(wsym)  # keep each pair once; wsym is symmetric, zero diagonal
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    total = 1 << n
    best_idx = 0
    best_e = math.inf
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.float64)
        e = bits @ lin + ((bits @ wu) * bits).sum(axis=1) + offset
        k = int(np.argmin(e))  # first occurrence, so lowest index in chunk
        if e[k] < best_e:  # strict: an earlier chunk keeps the tie
            best_e = float(e[k])
            best_idx = start + k
    return best_idx, best_e


def anneal_sweeps(lin, wsym, x, fld, e0, betas, uniforms, best_x):
    """Single-flip Metropolis sweeps in variable-index order.

    Same contract as the compiled version: mutates ``x``, ``fld`` and
    ``best_x`` in place and returns ``(final_energy, best_energy)``.
    """
    n = x.shape[0]
    e = best_e = e0
    k = 0
    for beta in betas:
        for i in range(n):
            de = -fld[i] if x[i] else fld[i]
            u = uniforms[k]
            k += 1
            if de <= 0.0 or u < math.exp(-beta * de):
                dx = -1.0 if x[i] else 1.0
                x[i] ^= 1
                e += de
                fld += wsym[i] * dx
                if e < best_e:
                    best_e = e
                    best_x[:] = x
    return e, best_e
