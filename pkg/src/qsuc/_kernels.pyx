# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Gray-code exhaustive QUBO scan and Metropolis sweeps.

Behavior must stay identical to ``_kernels_py`` (same arithmetic, same
random-number consumption) so the import-time backend choice is invisible
to callers.
"""

from libc.math cimport exp


def backend_name():
    return "compiled"


def exhaustive_scan(double[::1] lin, double[:, ::1] wsym, double offset):
    """Scan all 2**n assignments of a dense QUBO.

    Returns ``(best_index, best_energy)`` where the index is the bitstring
    read as a binary number (variable 0 = most significant bit). Ties resolve
    to the lowest index. The scan walks a reflected Gray code so each step is
    a single-bit flip costing O(n).
    """
    cdef Py_ssize_t n = lin.shape[0]
    if n > 30:
        raise ValueError("exhaustive_scan kernel supports at most 30 variables")
    cdef unsigned long long total = 1ULL << n
    cdef unsigned long long t, gray = 0, prev = 0, diff, best_idx = 0
    cdef Py_ssize_t i, j, pos
    cdef double e = offset, best_e = offset, de
    cdef unsigned char[32] x
    for i in range(n):
        x[i] = 0
    for t in range(1, total):
        gray = t ^ (t >> 1)
        diff = gray ^ prev
        pos = 0
        while not (diff & 1):
            diff >>= 1
            pos += 1
        i = n - 1 - pos  # code bit ``pos`` carries variable n-1-pos
        de = lin[i]
        for j in range(n):
            de += wsym[i, j] * x[j]
        if x[i]:
            de = -de
        e += de
        x[i] ^= 1
        if e < best_e or (e == best_e and gray < best_idx):
            best_e = e
            best_idx = gray
        prev = gray
    return best_idx, best_e


def anneal_sweeps(double[::1] lin, double[:, ::1] wsym,
                  unsigned char[::1] x, double[::1] fld, double e0,
                  double[::1] betas, double[::1] uniforms,
                  unsigned char[::1] best_x):
    """Single-flip Metropolis sweeps in variable-index order.

    ``x``, ``fld`` and ``best_x`` are mutated in place. ``fld[i]`` must enter
    as ``lin[i] + sum_j wsym[i, j] * x[j]``; exactly one uniform is consumed
    per proposal. Returns ``(final_energy, best_energy)`` relative to ``e0``.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t sweeps = betas.shape[0]
    cdef Py_ssize_t s, i, j, k = 0
    cdef double e = e0, best_e = e0, de, beta, dx, u
    for s in range(sweeps):
        beta = betas[s]
        for i in range(n):
            de = fld[i]
            if x[i]:
                de = -de
            u = uniforms[k]
            k += 1
            if de <= 0.0 or u < exp(-beta * de):
                dx = -1.0 if x[i] else 1.0
                x[i] ^= 1
                e += de
                for j in range(n):
                    fld[j] += wsym[i, j] * dx
                if e < best_e:
                    best_e = e
                    for j in range(n):
                        best_x[j] = x[j]
    return e, best_e
