# Compiled inner loops for the critical-point solver. Everything here works on
# plain arrays; validation lives in critical.py.

import numpy
from numba import njit


@njit(cache=True)
def weighted_predictions(roots, weights, total):
    """Per distinct root: pull sum R(u) = sum_{v != u} k_v / (u - v) and the
    first-order critical point u - k_u M / (total R(u)), with M = total - k_u."""
    d = roots.size
    pred = numpy.empty(d, dtype=numpy.complex128)
    pull = numpy.empty(d, dtype=numpy.complex128)
    for i in range(d):
        ur = roots[i].real
        ui = roots[i].imag
        sr = 0.0
        si = 0.0
        for k in range(d):
            if k == i:
                continue
            dr = ur - roots[k].real
            di = ui - roots[k].imag
            den = dr * dr + di * di
            sr += weights[k] * dr / den
            si -= weights[k] * di / den
        s = complex(sr, si)
        pull[i] = s
        m = total - weights[i]
        if s == 0:
            pred[i] = complex(numpy.inf, numpy.inf)
        else:
            pred[i] = roots[i] - weights[i] * m / (total * s)
    return pred, pull


@njit(cache=True)
def aberth_corrections(roots, weights, w, active, corr, resid, status):
    """One Jacobi sweep over the active iterates.

    The Newton ratio is for q = p' / prod (z - u)^(k_u - 1), the derivative with
    the known critical points at multiple roots divided out:
        q'/q = (S1^2 - S2)/S1 - sum (k_u - 1)/(z - u).
    status: 0 ok, 1 iterate sits on a root, 2 iterates coincide, 3 non-finite.
    """
    d = roots.size
    m = w.size
    for a in range(active.size):
        j = active[a]
        zr = w[j].real
        zi = w[j].imag
        s1r = 0.0
        s1i = 0.0
        s2r = 0.0
        s2i = 0.0
        tr = 0.0
        ti = 0.0
        st = 0
        for k in range(d):
            dr = zr - roots[k].real
            di = zi - roots[k].imag
            den = dr * dr + di * di
            if den == 0.0:
                st = 1
                break
            ir = dr / den
            ii = -di / den
            wk = weights[k]
            s1r += wk * ir
            s1i += wk * ii
            s2r += wk * (ir * ir - ii * ii)
            s2i += wk * (2.0 * ir * ii)
            if wk > 1.0:
                tr += (wk - 1.0) * ir
                ti += (wk - 1.0) * ii
        if st != 0:
            status[a] = st
            corr[a] = 0j
            resid[a] = numpy.inf
            continue
        ar = 0.0
        ai = 0.0
        for k in range(m):
            if k == j:
                continue
            dr = zr - w[k].real
            di = zi - w[k].imag
            den = dr * dr + di * di
            if den == 0.0:
                st = 2
                break
            ar += dr / den
            ai -= di / den
        if st != 0:
            status[a] = st
            corr[a] = 0j
            resid[a] = numpy.inf
            continue
        s1 = complex(s1r, s1i)
        resid[a] = abs(s1)
        if s1 == 0:
            corr[a] = 0j
            status[a] = 0
            continue
        s2 = complex(s2r, s2i)
        qlog = (s1 * s1 - s2) / s1 - complex(tr, ti)
        if qlog == 0:
            status[a] = 3
            corr[a] = 0j
            continue
        ratio = 1.0 / qlog
        c = ratio / (1.0 - ratio * complex(ar, ai))
        if not (numpy.isfinite(c.real) and numpy.isfinite(c.imag)):
            status[a] = 3
            corr[a] = 0j
            continue
        corr[a] = c
        status[a] = 0


@njit(cache=True)
def coefficient_aberth(coeffs, dcoeffs, z, max_iter, tol):
    """Plain Aberth iteration on a coefficient vector (highest degree first).

    Used only as an independent oracle at small degree."""
    m = z.size
    for it in range(max_iter):
        biggest = 0.0
        for j in range(m):
            p = coeffs[0]
            for c in coeffs[1:]:
                p = p * z[j] + c
            dp = dcoeffs[0]
            for c in dcoeffs[1:]:
                dp = dp * z[j] + c
            if p == 0:
                continue
            ratio = p / dp
            s = 0j
            for k in range(m):
                if k != j:
                    s += 1.0 / (z[j] - z[k])
            step = ratio / (1.0 - ratio * s)
            z[j] -= step
            if abs(step) > biggest:
                biggest = abs(step)
        if biggest < tol:
            return it + 1
    return max_iter
