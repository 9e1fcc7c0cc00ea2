# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, nonecheck=False
"""Compiled scaled min-sum kernels.

Both entry points decode a batch of syndromes on a check-major Tanner graph
and release the GIL for the whole batch. Floating-point evaluation order
matches ``_fallback`` exactly, so the two backends agree bit for bit.
"""

from libc.math cimport INFINITY, fabs
from libc.stdint cimport int8_t, int16_t, int32_t, uint8_t
from libc.stdlib cimport free, malloc

ctypedef fused qmsg_t:
    int8_t
    int16_t


cdef inline bint _syndrome_ok(const int32_t* check_ptr, const int32_t* edge_var,
                              const uint8_t* syn, const uint8_t* est,
                              int c0, int c1) noexcept nogil:
    cdef int c, e
    cdef uint8_t par
    for c in range(c0, c1):
        par = syn[c]
        for e in range(check_ptr[c], check_ptr[c + 1]):
            par ^= est[edge_var[e]]
        if par:
            return False
    return True


cdef void _block_float(const int32_t* check_ptr, const int32_t* edge_var,
                       const int32_t* var_ptr, const int32_t* var_edges,
                       const uint8_t* syn, const double* gamma,
                       double alpha, int max_iter, bint early_term, double large,
                       int c0, int c1, int v0, int v1,
                       double* q, double* r, double* Q, uint8_t* est,
                       int32_t* iters_out, uint8_t* conv_out) noexcept nogil:
    cdef int c, e, v, i, j, k = 0, imin, a, b
    cdef uint8_t parity, neg
    cdef double x, mag, min1, min2, acc, val
    cdef bint ok = False

    for v in range(v0, v1):
        for i in range(var_ptr[v], var_ptr[v + 1]):
            q[var_edges[i]] = gamma[v]

    while k < max_iter:
        k += 1
        # check nodes: sign parity and two smallest magnitudes, then outputs
        for c in range(c0, c1):
            parity = syn[c]
            min1 = INFINITY
            min2 = INFINITY
            imin = -1
            for e in range(check_ptr[c], check_ptr[c + 1]):
                x = q[e]
                parity ^= (x < 0)
                mag = fabs(x)
                if mag < min1:
                    min2 = min1
                    min1 = mag
                    imin = e
                elif mag < min2:
                    min2 = mag
            if check_ptr[c + 1] - check_ptr[c] == 1:
                min2 = large
            for e in range(check_ptr[c], check_ptr[c + 1]):
                neg = parity ^ (q[e] < 0)
                val = alpha * (min2 if e == imin else min1)
                r[e] = -val if neg else val
        # variable nodes, posterior and hard decision
        for v in range(v0, v1):
            a = var_ptr[v]
            b = var_ptr[v + 1]
            for i in range(a, b):
                acc = gamma[v]
                for j in range(a, b):
                    if j != i:
                        acc = acc + r[var_edges[j]]
                q[var_edges[i]] = acc
            acc = gamma[v]
            for j in range(a, b):
                acc = acc + r[var_edges[j]]
            Q[v] = acc
            est[v] = acc < 0
        ok = _syndrome_ok(check_ptr, edge_var, syn, est, c0, c1)
        if ok and early_term:
            break
    iters_out[0] = k
    conv_out[0] = ok


cdef inline int32_t _sat(int32_t x, int32_t hi) noexcept nogil:
    if x > hi:
        return hi
    if x < -hi:
        return -hi
    return x


cdef void _block_int(const int32_t* check_ptr, const int32_t* edge_var,
                     const int32_t* var_ptr, const int32_t* var_edges,
                     const uint8_t* syn, const qmsg_t* gamma,
                     int32_t alpha_fix, int max_iter, bint early_term, int32_t satmax,
                     int c0, int c1, int v0, int v1,
                     qmsg_t* q, qmsg_t* r, qmsg_t* Q, uint8_t* est,
                     int32_t* iters_out, uint8_t* conv_out) noexcept nogil:
    cdef int c, e, v, i, j, k = 0, imin, a, b
    cdef uint8_t parity, neg
    cdef int32_t x, mag, min1, min2, acc, val
    cdef bint ok = False

    for v in range(v0, v1):
        for i in range(var_ptr[v], var_ptr[v + 1]):
            q[var_edges[i]] = gamma[v]

    while k < max_iter:
        k += 1
        for c in range(c0, c1):
            parity = syn[c]
            min1 = satmax + 1
            min2 = satmax + 1
            imin = -1
            for e in range(check_ptr[c], check_ptr[c + 1]):
                x = q[e]
                if x < 0:
                    parity ^= 1
                    mag = -x
                else:
                    mag = x
                if mag < min1:
                    min2 = min1
                    min1 = mag
                    imin = e
                elif mag < min2:
                    min2 = mag
            if check_ptr[c + 1] - check_ptr[c] == 1:
                min2 = satmax
            for e in range(check_ptr[c], check_ptr[c + 1]):
                neg = parity ^ (q[e] < 0)
                val = ((min2 if e == imin else min1) * alpha_fix + 512) >> 10
                r[e] = <qmsg_t>(-val if neg else val)
        for v in range(v0, v1):
            a = var_ptr[v]
            b = var_ptr[v + 1]
            for i in range(a, b):
                acc = gamma[v]
                for j in range(a, b):
                    if j != i:
                        acc = acc + r[var_edges[j]]
                q[var_edges[i]] = <qmsg_t>_sat(acc, satmax)
            acc = gamma[v]
            for j in range(a, b):
                acc = acc + r[var_edges[j]]
            Q[v] = <qmsg_t>_sat(acc, satmax)
            est[v] = acc < 0
        ok = _syndrome_ok(check_ptr, edge_var, syn, est, c0, c1)
        if ok and early_term:
            break
    iters_out[0] = k
    conv_out[0] = ok


def minsum_float(const int32_t[::1] check_ptr, const int32_t[::1] edge_var,
                 const int32_t[::1] var_ptr, const int32_t[::1] var_edges,
                 const int32_t[::1] block_check_ptr, const int32_t[::1] block_var_ptr,
                 const uint8_t[:, ::1] syndromes, const double[::1] gamma,
                 double alpha, int max_iter, bint early_term, double large,
                 uint8_t[:, ::1] e_hat, int32_t[:, ::1] iters, uint8_t[:, ::1] conv):
    """Float64 scaled min-sum over a batch; results written into the out arrays."""
    cdef Py_ssize_t n_batch = syndromes.shape[0]
    cdef int n_blocks = block_check_ptr.shape[0] - 1
    cdef int n_edges = check_ptr[check_ptr.shape[0] - 1]
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef Py_ssize_t s
    cdef int blk
    cdef double* q = <double*> malloc(max(n_edges, 1) * sizeof(double))
    cdef double* r = <double*> malloc(max(n_edges, 1) * sizeof(double))
    cdef double* Q = <double*> malloc(max(n_vars, 1) * sizeof(double))
    if q == NULL or r == NULL or Q == NULL:
        free(q); free(r); free(Q)
        raise MemoryError()
    try:
        with nogil:
            for s in range(n_batch):
                for blk in range(n_blocks):
                    _block_float(&check_ptr[0], &edge_var[0], &var_ptr[0], &var_edges[0],
                                 &syndromes[s, 0], &gamma[0], alpha, max_iter, early_term, large,
                                 block_check_ptr[blk], block_check_ptr[blk + 1],
                                 block_var_ptr[blk], block_var_ptr[blk + 1],
                                 q, r, Q, &e_hat[s, 0], &iters[s, blk], &conv[s, blk])
    finally:
        free(q); free(r); free(Q)


def minsum_int(const int32_t[::1] check_ptr, const int32_t[::1] edge_var,
               const int32_t[::1] var_ptr, const int32_t[::1] var_edges,
               const int32_t[::1] block_check_ptr, const int32_t[::1] block_var_ptr,
               const uint8_t[:, ::1] syndromes, const qmsg_t[::1] gamma,
               int32_t alpha_fix, int max_iter, bint early_term, int32_t satmax,
               uint8_t[:, ::1] e_hat, int32_t[:, ::1] iters, uint8_t[:, ::1] conv):
    """Saturating int8/int16 scaled min-sum; message width follows ``gamma``'s dtype."""
    cdef Py_ssize_t n_batch = syndromes.shape[0]
    cdef int n_blocks = block_check_ptr.shape[0] - 1
    cdef int n_edges = check_ptr[check_ptr.shape[0] - 1]
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef Py_ssize_t s
    cdef int blk
    cdef qmsg_t* q = <qmsg_t*> malloc(max(n_edges, 1) * sizeof(qmsg_t))
    cdef qmsg_t* r = <qmsg_t*> malloc(max(n_edges, 1) * sizeof(qmsg_t))
    cdef qmsg_t* Q = <qmsg_t*> malloc(max(n_vars, 1) * sizeof(qmsg_t))
    if q == NULL or r == NULL or Q == NULL:
        free(q); free(r); free(Q)
        raise MemoryError()
    try:
        with nogil:
            for s in range(n_batch):
                for blk in range(n_blocks):
                    _block_int(&check_ptr[0], &edge_var[0], &var_ptr[0], &var_edges[0],
                               &syndromes[s, 0], &gamma[0], alpha_fix, max_iter, early_term, satmax,
                               block_check_ptr[blk], block_check_ptr[blk + 1],
                               block_var_ptr[blk], block_var_ptr[blk + 1],
                               q, r, Q, &e_hat[s, 0], &iters[s, blk], &conv[s, blk])
    finally:
        free(q); free(r); free(Q)
