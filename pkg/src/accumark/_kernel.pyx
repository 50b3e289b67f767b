# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled modal sweep. Semantics mirror _kernel_py exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"


cdef void _fc_uniform(const double* f, Py_ssize_t n, double h,
                      double* d, double* m) noexcept nogil:
    """Monotone-limited slopes on a uniform grid (one real component)."""
    cdef Py_ssize_t i
    cdef double s
    for i in range(n - 1):
        d[i] = (f[i + 1] - f[i]) / h
    if n == 2:
        m[0] = d[0]
        m[1] = d[0]
        return
    for i in range(1, n - 1):
        if d[i - 1] * d[i] > 0.0:
            m[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i])
        else:
            m[i] = 0.0
    if d[0] * d[1] <= 0.0:
        m[0] = 0.0
    else:
        s = (3.0 * d[0] - d[1]) / 2.0
        m[0] = s if s * d[0] > 0.0 else 0.0
    if d[n - 2] * d[n - 3] <= 0.0:
        m[n - 1] = 0.0
    else:
        s = (3.0 * d[n - 2] - d[n - 3]) / 2.0
        m[n - 1] = s if s * d[n - 2] > 0.0 else 0.0


cdef void _sweep(Py_ssize_t n_steps, Py_ssize_t n,
                 const double* lam, double h, double dt,
                 const double* sup, const double* wfact,
                 const double* dprime,
                 const long long* offsets, const double* fracs,
                 const double complex* coeffs, Py_ssize_t nmq,
                 int mode, int boundary,
                 double complex* F, double complex* gains,
                 double complex* work,
                 double* fre, double* fim, double* dre, double* dim,
                 double* mre, double* mim) noexcept nogil:
    cdef Py_ssize_t step, i, mq, j, top = n - 1
    cdef long long off
    cdef double fr, h00, h10, h01, h11, omf
    cdef double complex c, v, eslope, ftop
    for step in range(n_steps):
        if mode == 1:
            for i in range(n):
                fre[i] = F[i].real
                fim[i] = F[i].imag
            _fc_uniform(fre, n, h, dre, mre)
            _fc_uniform(fim, n, h, dim, mim)
            eslope = mre[top] + 1j * mim[top]
        else:
            eslope = (F[top] - F[top - 1]) / h
        ftop = F[top]
        for i in range(n):
            gains[i] = 0.0
        for mq in range(nmq):
            off = offsets[mq]
            fr = fracs[mq]
            c = coeffs[mq]
            if mode == 1:
                omf = 1.0 - fr
                h00 = omf * omf * (1.0 + 2.0 * fr)
                h10 = fr * omf * omf
                h01 = fr * fr * (3.0 - 2.0 * fr)
                h11 = fr * fr * (fr - 1.0)
                for i in range(n):
                    j = i + off
                    if j < top:
                        v = (F[j] * h00
                             + h * (mre[j] + 1j * mim[j]) * h10
                             + F[j + 1] * h01
                             + h * (mre[j + 1] + 1j * mim[j + 1]) * h11)
                    elif boundary == 1:
                        v = ftop + ((j + fr) - top) * h * eslope
                    else:
                        v = ftop
                    gains[i] = gains[i] + c * v
            else:
                omf = 1.0 - fr
                for i in range(n):
                    j = i + off
                    if j < top:
                        v = F[j] * omf + F[j + 1] * fr
                    elif boundary == 1:
                        v = ftop + ((j + fr) - top) * h * eslope
                    else:
                        v = ftop
                    gains[i] = gains[i] + c * v
        # RHS assembly and the factorized tridiagonal solve.
        for i in range(n):
            work[i] = (1.0 - dt * lam[i]) * F[i] + dt * lam[i] * gains[i]
        for i in range(1, n):
            work[i] = work[i] - wfact[i] * work[i - 1]
        F[top] = work[top] / dprime[top]
        for i in range(top - 1, -1, -1):
            F[i] = (work[i] - sup[i] * F[i + 1]) / dprime[i]


def modal_sweep(n_steps, lam, h, dt, sub, diag, sup, offsets, fracs,
                coeffs, mode, boundary):
    """Run n_steps backward from the unit terminal surface (see _kernel_py)."""
    cdef cnp.ndarray[double, ndim=1] lam_a = np.ascontiguousarray(
        lam, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] sub_a = np.ascontiguousarray(
        sub, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] diag_a = np.ascontiguousarray(
        diag, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] sup_a = np.ascontiguousarray(
        sup, dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1] off_a = np.ascontiguousarray(
        offsets, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] fr_a = np.ascontiguousarray(
        fracs, dtype=np.float64)
    cdef cnp.ndarray[double complex, ndim=1] co_a = np.ascontiguousarray(
        coeffs, dtype=np.complex128)

    cdef Py_ssize_t n = lam_a.shape[0]
    cdef Py_ssize_t nmq = co_a.shape[0]
    cdef Py_ssize_t steps = int(n_steps)
    cdef int mode_i = int(mode)
    cdef int boundary_i = int(boundary)
    cdef double h_d = float(h)
    cdef double dt_d = float(dt)

    # Thomas factorization of the time-independent operator, done once.
    cdef cnp.ndarray[double, ndim=1] dprime = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wfact = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i
    dprime[0] = diag_a[0]
    for i in range(1, n):
        wfact[i] = sub_a[i - 1] / dprime[i - 1]
        dprime[i] = diag_a[i] - wfact[i] * sup_a[i - 1]

    cdef cnp.ndarray[double complex, ndim=1] F = np.ones(
        n, dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=1] gains = np.empty(
        n, dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=1] work = np.empty(
        n, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] fre = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] fim = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dre = np.empty(n - 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dim = np.empty(n - 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] mre = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] mim = np.empty(n, dtype=np.float64)

    with nogil:
        _sweep(steps, n, &lam_a[0], h_d, dt_d, &sup_a[0], &wfact[0],
               &dprime[0], <const long long*> &off_a[0], &fr_a[0],
               <const double complex*> &co_a[0], nmq, mode_i, boundary_i,
               <double complex*> &F[0], <double complex*> &gains[0],
               <double complex*> &work[0], &fre[0], &fim[0], &dre[0],
               &dim[0], &mre[0], &mim[0])
    return F
