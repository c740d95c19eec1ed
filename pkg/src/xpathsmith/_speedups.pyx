# cython: boundscheck=False, wraparound=False
"""Compiled twin of distance._levenshtein_py; same algorithm, same results."""


def levenshtein(str a, str b):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if a == b:
        return 0
    if la == 0:
        return lb
    if lb == 0:
        return la
    if la < lb:
        a, b = b, a
        la, lb = lb, la

    cdef list previous = list(range(lb + 1))
    cdef list current = [0] * (lb + 1)
    cdef Py_ssize_t i, j
    cdef Py_UCS4 ca, cb
    cdef Py_ssize_t cost, dele, ins, sub, best

    for i in range(1, la + 1):
        ca = a[i - 1]
        current[0] = i
        for j in range(1, lb + 1):
            cb = b[j - 1]
            cost = 0 if ca == cb else 1
            dele = <Py_ssize_t>previous[j] + 1
            ins = <Py_ssize_t>current[j - 1] + 1
            sub = <Py_ssize_t>previous[j - 1] + cost
            best = dele
            if ins < best:
                best = ins
            if sub < best:
                best = sub
            current[j] = best
        previous, current = current, previous
    return previous[lb]
