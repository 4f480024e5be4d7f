# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-walk enumeration. Mirrors ``_kernels_py.closed_walks``."""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

from ._kernels_py import BudgetExceeded

cnp.import_array()


cdef bint _is_min_rotation(const long* seq, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t r, i
    cdef long a, b
    for r in range(1, n):
        for i in range(n):
            a = seq[i]
            b = seq[(i + r) % n]
            if a != b:
                if b < a:
                    return False
                break
    return True


cdef long _repetition(const long* seq, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t p, i
    cdef bint ok
    for p in range(1, n + 1):
        if n % p:
            continue
        ok = True
        for i in range(p, n):
            if seq[i] != seq[i - p]:
                ok = False
                break
        if ok:
            return n // p
    return 1


def closed_walks(succ_ptr, succ_idx, fac, bond_len, double lmax, bint skip_zero, long max_count):
    cdef const long[::1] sptr = np.ascontiguousarray(succ_ptr, dtype=np.int64)
    cdef const long[::1] sidx = np.ascontiguousarray(succ_idx, dtype=np.int64)
    cdef const double[:, ::1] F = np.ascontiguousarray(fac, dtype=np.float64)
    cdef const double[::1] blen = np.ascontiguousarray(bond_len, dtype=np.float64)
    cdef Py_ssize_t nb = blen.shape[0]
    cdef double slack = 1e-12 * (lmax if lmax > 1.0 else 1.0)
    cdef vector[long] flat
    cdef vector[long] offsets
    cdef vector[double] lengths
    cdef vector[double] scat
    cdef vector[long] reps
    cdef vector[long] path
    cdef vector[double] lens
    cdef vector[double] prods
    cdef vector[long] iters
    cdef long s, top, pos, nxt, depth
    cdef double close, f, nl
    cdef bint overflow = False
    offsets.push_back(0)
    with nogil:
        for s in range(nb):
            if overflow:
                break
            if blen[s] > lmax + slack:
                continue
            path.clear(); lens.clear(); prods.clear(); iters.clear()
            path.push_back(s); lens.push_back(blen[s]); prods.push_back(1.0); iters.push_back(sptr[s])
            while path.size() > 0:
                depth = path.size() - 1
                top = path[depth]
                pos = iters[depth]
                if pos == sptr[top]:
                    close = F[top, s]
                    if close == close and not (skip_zero and close == 0.0):
                        if _is_min_rotation(path.data(), depth + 1):
                            if <long>lengths.size() >= max_count:
                                overflow = True
                                break
                            flat.insert(flat.end(), path.begin(), path.end())
                            offsets.push_back(flat.size())
                            lengths.push_back(lens[depth])
                            scat.push_back(prods[depth] * close)
                            reps.push_back(_repetition(path.data(), depth + 1))
                if pos == sptr[top + 1]:
                    path.pop_back(); lens.pop_back(); prods.pop_back(); iters.pop_back()
                    continue
                iters[depth] = pos + 1
                nxt = sidx[pos]
                if nxt < s:
                    continue
                f = F[top, nxt]
                if skip_zero and f == 0.0:
                    continue
                nl = lens[depth] + blen[nxt]
                if nl > lmax + slack:
                    continue
                path.push_back(nxt); lens.push_back(nl); prods.push_back(prods[depth] * f); iters.push_back(sptr[nxt])
    if overflow:
        raise BudgetExceeded(max_count)
    return (
        _to_int_array(flat),
        _to_int_array(offsets),
        _to_float_array(lengths),
        _to_float_array(scat),
        _to_int_array(reps),
    )


cdef object _to_int_array(vector[long]& v):
    out = np.empty(v.size(), dtype=np.int64)
    cdef long[::1] view = out
    cdef Py_ssize_t i
    for i in range(<Py_ssize_t>v.size()):
        view[i] = v[i]
    return out


cdef object _to_float_array(vector[double]& v):
    out = np.empty(v.size(), dtype=np.float64)
    cdef double[::1] view = out
    cdef Py_ssize_t i
    for i in range(<Py_ssize_t>v.size()):
        view[i] = v[i]
    return out
