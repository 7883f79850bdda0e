# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

C twin of the pure NumPy kernel module: same function names, same
algorithms, same contracts. Scalar special functions and the three
fixed-point iterations run as C loops; matrix work stays on small
stack buffers (dimensions above 32 delegate to the pure module).
"""
import numpy as np

from libc.math cimport (
    INFINITY,
    NAN,
    exp,
    fabs,
    isfinite,
    isinf,
    lgamma,
    log,
    log1p,
    sqrt,
)

from . import _purekernels as _pk

BACKEND = "compiled"

cdef double _FPMIN = 1e-300
cdef int _MAX_SERIES = 600
cdef int _KMAX = 32


# ---------------------------------------------------------------------------
# scalar special functions
# ---------------------------------------------------------------------------

cdef double _gamma_p_series(double a, double x) noexcept nogil:
    cdef double ap = a
    cdef double term = 1.0 / a
    cdef double total = term
    cdef int i
    for i in range(_MAX_SERIES):
        ap += 1.0
        term *= x / ap
        total += term
        if fabs(term) < fabs(total) * 1e-17:
            break
    return total * exp(-x + a * log(x) - lgamma(a))


cdef double _gamma_q_cf(double a, double x) noexcept nogil:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / _FPMIN
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta, log_pre
    cdef int i
    for i in range(1, _MAX_SERIES):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < 1e-16:
            break
    log_pre = -x + a * log(x) - lgamma(a)
    if log_pre < -745.0:
        return 0.0
    return exp(log_pre) * h


cdef double _reg_lower_gamma(double a, double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_cf(a, x)


cdef double _reg_upper_gamma(double a, double x) noexcept nogil:
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_cf(a, x)


def reg_lower_gamma(double a, double x):
    """Regularized lower incomplete gamma P(a, x), a > 0, x >= 0."""
    return _reg_lower_gamma(a, x)


def reg_upper_gamma(double a, double x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    return _reg_upper_gamma(a, x)


cdef double _beta_cf(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_SERIES):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < 1e-16:
            break
    return h


cdef double _reg_inc_beta(double a, double b, double x) noexcept nogil:
    cdef double log_bt, bt
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_bt = (
        lgamma(a + b)
        - lgamma(a)
        - lgamma(b)
        + a * log(x)
        + b * log1p(-x)
    )
    bt = exp(log_bt) if log_bt > -745.0 else 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _beta_cf(a, b, x) / a
    return 1.0 - bt * _beta_cf(b, a, 1.0 - x) / b


def reg_inc_beta(double a, double b, double x):
    """Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]."""
    return _reg_inc_beta(a, b, x)


cdef double _norm_ppf_approx(double p) noexcept nogil:
    cdef double tail, t, z
    if p <= 0.0:
        return -38.0
    if p >= 1.0:
        return 38.0
    tail = p if p < 1.0 - p else 1.0 - p
    t = sqrt(-2.0 * log(tail))
    z = t - (2.515517 + t * (0.802853 + t * 0.010328)) / (
        1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))
    )
    return z if p >= 0.5 else -z


cdef double _gammainc_inv(double a, double p) noexcept nogil:
    cdef double q, z, t, x, lo, hi, lgam, val, resid, log_deriv, deriv, xn, step, lx
    cdef int i
    cdef bint left
    if p <= 0.0:
        return 0.0
    q = 1.0 - p
    z = _norm_ppf_approx(p)
    t = 1.0 - 2.0 / (9.0 * a) + z * sqrt(2.0 / (9.0 * a))
    x = a * t * t * t if t > 0.0 else 0.0
    if x <= 0.0 or a < 0.5:
        lx = (log(p) + lgamma(a + 1.0)) / a
        if lx < -744.0:
            return 0.0
        x = exp(lx)
        if x == 0.0:
            x = _FPMIN
    lo = 0.0
    hi = INFINITY
    lgam = lgamma(a)
    for i in range(100):
        left = x < a + 1.0
        if left:
            val = _gamma_p_series(a, x)
            resid = val - p
        else:
            val = _gamma_q_cf(a, x)
            resid = q - val
        if resid > 0.0:
            hi = x
        else:
            lo = x
        if resid == 0.0:
            break
        log_deriv = -x + (a - 1.0) * log(x) - lgam
        deriv = exp(log_deriv) if log_deriv > -745.0 else 0.0
        xn = NAN
        if deriv > 0.0 and val > 0.0:
            # Newton on the log of the tail that keeps relative scale,
            # so steps stay productive far out where the linear residual
            # is exponentially small.
            if left:
                step = (val / deriv) * (log(val) - log(p))
            else:
                step = -(val / deriv) * (log(val) - log(q))
            xn = x - step
            if fabs(step) <= 1e-14 * (1.0 + fabs(x)):
                if xn > 0.0 and isfinite(xn):
                    x = xn
                break
        if not (lo < xn and xn < hi):
            xn = 2.0 * x if isinf(hi) else 0.5 * (lo + hi)
        if fabs(xn - x) <= 1e-14 * (1.0 + fabs(xn)):
            x = xn
            break
        x = xn
        if isfinite(hi) and hi - lo <= 1e-14 * (1.0 + hi):
            break
    return x


def gammainc_inv(double a, double p):
    """Inverse of P(a, .): the x with reg_lower_gamma(a, x) = p, p in [0, 1)."""
    return _gammainc_inv(a, p)


cdef double _gammainc_inv_q(double a, double q) noexcept nogil:
    cdef double lgam, t, x, lo, hi, val, resid, log_deriv, deriv, xn, step
    cdef int i
    if q >= 0.5:
        return _gammainc_inv(a, 1.0 - q)
    lgam = lgamma(a)
    t = -log(q) - lgam
    x = t + (a - 1.0) * log(t if t > 2.0 else 2.0)
    for i in range(2):
        x = t + (a - 1.0) * log(x if x > 2.0 else 2.0)
        if x < _FPMIN:
            x = _FPMIN
    if x < a + 1.0:
        x = a + 1.0
    lo = 0.0
    hi = INFINITY
    for i in range(100):
        if x < a + 1.0:
            val = 1.0 - _gamma_p_series(a, x)
        else:
            val = _gamma_q_cf(a, x)
        resid = val - q
        if resid > 0.0:
            lo = x
        else:
            hi = x
        if resid == 0.0:
            break
        log_deriv = -x + (a - 1.0) * log(x) - lgam
        deriv = exp(log_deriv) if log_deriv > -745.0 else 0.0
        xn = NAN
        if deriv > 0.0 and val > 0.0:
            # log-space Newton: exact in one step for a = 1 and fast
            # everywhere the upper tail decays exponentially
            step = -(val / deriv) * (log(val) - log(q))
            xn = x - step
            if fabs(step) <= 1e-14 * (1.0 + fabs(x)):
                if xn > 0.0 and isfinite(xn):
                    x = xn
                break
        if not (lo < xn and xn < hi):
            xn = 2.0 * x if isinf(hi) else 0.5 * (lo + hi)
        if fabs(xn - x) <= 1e-14 * (1.0 + fabs(xn)):
            x = xn
            break
        x = xn
        if isfinite(hi) and hi - lo <= 1e-14 * (1.0 + hi):
            break
    return x


def gammainc_inv_q(double a, double q):
    """Inverse of Q(a, .): the x with reg_upper_gamma(a, x) = q.

    Takes the upper-tail mass directly so that quantiles far in the
    tail keep full relative precision in q.
    """
    return _gammainc_inv_q(a, q)


cdef double _betainc_inv(double a, double b, double p) noexcept nogil:
    cdef double log_beta, lx, lu, x, lo, hi, resid, log_deriv, deriv, xn, step
    cdef int i
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    log_beta = lgamma(a) + lgamma(b) - lgamma(a + b)
    lx = (log(p) + log(a) + log_beta) / a
    lu = (log1p(-p) + log(b) + log_beta) / b
    if lx < -1.0:
        x = exp(lx)
    elif lu < -1.0:
        x = 1.0 - exp(lu)
    else:
        x = a / (a + b)
    if x < 1e-300:
        x = 1e-300
    if x > 1.0 - 1e-16:
        x = 1.0 - 1e-16
    lo = 0.0
    hi = 1.0
    for i in range(100):
        resid = _reg_inc_beta(a, b, x) - p
        if resid > 0.0:
            hi = x
        else:
            lo = x
        if resid == 0.0:
            break
        log_deriv = (a - 1.0) * log(x) + (b - 1.0) * log1p(-x) - log_beta
        deriv = exp(log_deriv) if log_deriv > -745.0 else 0.0
        xn = NAN
        if deriv > 0.0:
            step = resid / deriv
            xn = x - step
            if fabs(step) <= 1e-15 * (1.0 + fabs(x)):
                if 0.0 < xn and xn < 1.0:
                    x = xn
                break
        if not (lo < xn and xn < hi):
            xn = 0.5 * (lo + hi)
        if fabs(xn - x) <= 1e-15 * (1.0 + fabs(xn)):
            x = xn
            break
        x = xn
        if hi - lo <= 1e-16:
            break
    return x


def betainc_inv(double a, double b, double p):
    """Inverse of I_.(a, b): the x with reg_inc_beta(a, b, x) = p."""
    return _betainc_inv(a, b, p)


cdef double _student_radial_quantile(double k, double nu, double u) noexcept nogil:
    cdef double a, b, y, y1, ratio
    if u <= 0.0:
        return 0.0
    a = 0.5 * k
    b = 0.5 * nu
    if u <= 0.5:
        y = _betainc_inv(a, b, u)
        ratio = y / (1.0 - y)
    else:
        y1 = _betainc_inv(b, a, 1.0 - u)
        ratio = (1.0 - y1) / y1
    return sqrt(nu * ratio)


def student_radial_quantile(double k, double nu, double u):
    """Radius quantile of the dimension-k Student radial law with nu > 2.

    Computed through the incomplete beta ratio in whichever tail is
    smaller so the result keeps full relative precision for u near 1.
    """
    return _student_radial_quantile(k, nu, u)


def gammainc_inv_batch(double a, p):
    """Vectorized gammainc_inv over a 1-d array of probabilities."""
    cdef object arr = np.ascontiguousarray(p, dtype=np.float64)
    cdef object out = np.empty(arr.shape, dtype=np.float64)
    cdef double[::1] src = arr.ravel()
    cdef double[::1] dst = out.ravel()
    cdef Py_ssize_t i, size = src.shape[0]
    with nogil:
        for i in range(size):
            dst[i] = _gammainc_inv(a, src[i])
    return out


def student_radial_quantile_batch(double k, double nu, u):
    """Vectorized student_radial_quantile over a 1-d array."""
    cdef object arr = np.ascontiguousarray(u, dtype=np.float64)
    cdef object out = np.empty(arr.shape, dtype=np.float64)
    cdef double[::1] src = arr.ravel()
    cdef double[::1] dst = out.ravel()
    cdef Py_ssize_t i, size = src.shape[0]
    with nogil:
        for i in range(size):
            dst[i] = _student_radial_quantile(k, nu, src[i])
    return out


# ---------------------------------------------------------------------------
# small dense linear algebra on stack buffers (k <= 32)
# ---------------------------------------------------------------------------

cdef int _jacobi_eigh(double* a, double* vec, double* w, int k) noexcept nogil:
    """Eigendecomposition of the symmetric k x k matrix a (destroyed).

    vec receives the eigenvectors as columns (row-major), w the
    eigenvalues in ascending order. Cyclic Jacobi sweeps; returns the
    sweep count used (>= 0), or -1 when the off-diagonal mass fails to
    vanish within the sweep budget.
    """
    cdef int i, j, p, q, sweep, done
    cdef double off, frob, apq, app, aqq, theta, t, c, s, tau, aip, aiq, vip, viq, tmp
    for i in range(k):
        for j in range(k):
            vec[i * k + j] = 1.0 if i == j else 0.0
    if k == 1:
        w[0] = a[0]
        return 0
    for sweep in range(64):
        off = 0.0
        frob = 0.0
        for i in range(k):
            for j in range(k):
                tmp = a[i * k + j]
                frob += tmp * tmp
                if i != j:
                    off += tmp * tmp
        if off <= 1e-30 * (frob if frob > 1e-300 else 1e-300):
            done = 1
            break
        done = 0
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p * k + q]
                if fabs(apq) < 1e-300:
                    continue
                app = a[p * k + p]
                aqq = a[q * k + q]
                theta = 0.5 * (aqq - app) / apq
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p * k + p] = app - t * apq
                a[q * k + q] = aqq + t * apq
                a[p * k + q] = 0.0
                a[q * k + p] = 0.0
                for i in range(k):
                    if i != p and i != q:
                        aip = a[i * k + p]
                        aiq = a[i * k + q]
                        a[i * k + p] = aip - s * (aiq + tau * aip)
                        a[i * k + q] = aiq + s * (aip - tau * aiq)
                        a[p * k + i] = a[i * k + p]
                        a[q * k + i] = a[i * k + q]
                    vip = vec[i * k + p]
                    viq = vec[i * k + q]
                    vec[i * k + p] = vip - s * (viq + tau * vip)
                    vec[i * k + q] = viq + s * (vip - tau * viq)
    if not done:
        return -1
    for i in range(k):
        w[i] = a[i * k + i]
    # selection sort ascending, permuting eigenvector columns along
    for i in range(k - 1):
        p = i
        for j in range(i + 1, k):
            if w[j] < w[p]:
                p = j
        if p != i:
            tmp = w[i]
            w[i] = w[p]
            w[p] = tmp
            for j in range(k):
                tmp = vec[j * k + i]
                vec[j * k + i] = vec[j * k + p]
                vec[j * k + p] = tmp
    return sweep


cdef int _cholesky(double* a, double* l, int k) noexcept nogil:
    """Lower Cholesky factor of the symmetric matrix a; 0 ok, 1 not PD."""
    cdef int i, j, t
    cdef double s
    for i in range(k):
        for j in range(k):
            l[i * k + j] = 0.0
    for i in range(k):
        for j in range(i + 1):
            s = a[i * k + j]
            for t in range(j):
                s -= l[i * k + t] * l[j * k + t]
            if i == j:
                if s <= 0.0 or not isfinite(s):
                    return 1
                l[i * k + i] = sqrt(s)
            else:
                l[i * k + j] = s / l[j * k + j]
    return 0


cdef void _chol_inverse(double* l, double* inv, int k) noexcept nogil:
    """Inverse of L L' given the lower Cholesky factor l."""
    cdef int i, j, t
    cdef double s
    # invert the lower triangle in place into a scratch layout inside inv
    for i in range(k):
        for j in range(k):
            inv[i * k + j] = 0.0
    for i in range(k):
        inv[i * k + i] = 1.0 / l[i * k + i]
        for j in range(i):
            s = 0.0
            for t in range(j, i):
                s -= l[i * k + t] * inv[t * k + j]
            inv[i * k + j] = s / l[i * k + i]
    # inv currently holds L^{-1}; replace with L'^{-1} L^{-1} in place
    # (accumulate into the upper triangle of a temporary row scan)
    cdef double buf
    for i in range(k):
        for j in range(i, k):
            s = 0.0
            for t in range(j, k):
                s += inv[t * k + i] * inv[t * k + j]
            # stash the result in the strictly upper part first
            l[i * k + j] = s
    for i in range(k):
        for j in range(i, k):
            buf = l[i * k + j]
            inv[i * k + j] = buf
            inv[j * k + i] = buf


# ---------------------------------------------------------------------------
# fixed-point iterations
# ---------------------------------------------------------------------------

def weiszfeld_median(x, tol, max_iter):
    """Spatial-median iteration with the coincident-point correction.

    A depth-one residual extrapolation, accepted only when it lowers
    the objective, rescues the slow regime where the minimizer sits
    near a data point. Returns (median, iterations, converged).
    """
    cdef object xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double c_tol = float(tol)
    cdef int c_max = int(max_iter)
    cdef Py_ssize_t n = xa.shape[0]
    cdef int k = <int> xa.shape[1]
    if k > _KMAX:
        return _pk.weiszfeld_median(xa, c_tol, c_max)
    cdef double[:, ::1] xv = xa
    cdef object m_arr = xa.mean(axis=0)
    cdef double[::1] m = m_arr
    cdef double scale = 1.0 + float(np.abs(xa).max(initial=0.0))
    cdef double eta = 1e-12 * scale
    cdef double m_new[32]
    cdef double resid[32]
    cdef double prev_m[32]
    cdef double prev_resid[32]
    cdef double t_point[32]
    cdef double r_vec[32]
    cdef double cand[32]
    cdef double d_resid[32]
    cdef bint have_prev = False
    cdef bint converged = False
    cdef bint accelerated
    cdef int it = 0
    cdef Py_ssize_t i
    cdef int j
    cdef int n_near, n_far
    cdef double dist, wsum, r_norm, frac, rnorm2, mnorm2, denom, gamma
    cdef double obj_cand, obj_new, d, s

    with nogil:
        for it in range(1, c_max + 1):
            n_near = 0
            n_far = 0
            wsum = 0.0
            for j in range(k):
                t_point[j] = 0.0
                r_vec[j] = 0.0
            for i in range(n):
                dist = 0.0
                for j in range(k):
                    d = xv[i, j] - m[j]
                    dist += d * d
                dist = sqrt(dist)
                if dist <= eta:
                    n_near += 1
                else:
                    n_far += 1
                    wsum += 1.0 / dist
                    for j in range(k):
                        t_point[j] += xv[i, j] / dist
                        r_vec[j] += (xv[i, j] - m[j]) / dist
            if n_far == 0:
                converged = True
                break
            for j in range(k):
                t_point[j] /= wsum
            if n_near == 0:
                for j in range(k):
                    m_new[j] = t_point[j]
            else:
                r_norm = 0.0
                for j in range(k):
                    r_norm += r_vec[j] * r_vec[j]
                r_norm = sqrt(r_norm)
                if r_norm <= n_near:
                    converged = True
                    break
                frac = n_near / r_norm
                for j in range(k):
                    m_new[j] = (1.0 - frac) * t_point[j] + frac * m[j]
            rnorm2 = 0.0
            mnorm2 = 0.0
            for j in range(k):
                resid[j] = m_new[j] - m[j]
                rnorm2 += resid[j] * resid[j]
                mnorm2 += m_new[j] * m_new[j]
            if sqrt(rnorm2) <= c_tol * (1.0 + sqrt(mnorm2)):
                for j in range(k):
                    m[j] = m_new[j]
                converged = True
                break
            accelerated = False
            if have_prev:
                denom = 0.0
                gamma = 0.0
                for j in range(k):
                    d_resid[j] = resid[j] - prev_resid[j]
                    denom += d_resid[j] * d_resid[j]
                if denom > 0.0:
                    for j in range(k):
                        gamma += resid[j] * d_resid[j]
                    gamma /= denom
                    for j in range(k):
                        cand[j] = m[j] + resid[j] - gamma * (
                            (m[j] - prev_m[j]) + d_resid[j]
                        )
                    obj_cand = 0.0
                    obj_new = 0.0
                    for i in range(n):
                        s = 0.0
                        dist = 0.0
                        for j in range(k):
                            d = xv[i, j] - cand[j]
                            s += d * d
                            d = xv[i, j] - m_new[j]
                            dist += d * d
                        obj_cand += sqrt(s)
                        obj_new += sqrt(dist)
                    if obj_cand < obj_new:
                        for j in range(k):
                            m[j] = cand[j]
                        have_prev = False
                        accelerated = True
            if not accelerated:
                for j in range(k):
                    prev_m[j] = m[j]
                    prev_resid[j] = resid[j]
                    m[j] = m_new[j]
                have_prev = True
    return m_arr, it, bool(converged)


def tyler_fixed_point(x, location, tol, max_iter):
    """Direction-only shape fixed point, determinant-normalized each step.

    Returns (shape, iterations, status) with status 0 = converged,
    1 = iteration budget exhausted, 2 = degenerate data.
    """
    cdef object xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef object loc = np.ascontiguousarray(location, dtype=np.float64)
    cdef double c_tol = float(tol)
    cdef int c_max = int(max_iter)
    cdef Py_ssize_t n = xa.shape[0]
    cdef int k = <int> xa.shape[1]
    if k > _KMAX:
        return _pk.tyler_fixed_point(xa, loc, c_tol, c_max)
    cdef object xc_arr = xa - loc[None, :]
    cdef double[:, ::1] xc = xc_arr
    cdef object v_arr = np.eye(k)
    cdef double[:, ::1] v = v_arr
    cdef double work[1024]
    cdef double lfac[1024]
    cdef double inv_v[1024]
    cdef double v_new[1024]
    cdef double vecbuf[1024]
    cdef double wbuf[32]
    cdef double q, s, update, logdet, norm
    cdef Py_ssize_t i
    cdef int j, t, it = 0, status = 1
    cdef bint bad

    if k == 1:
        if np.all(np.abs(xc_arr) < 1e-300):
            return np.eye(1), 0, 2
        return np.eye(1), 0, 0
    sq = np.einsum("ij,ij->i", xc_arr, xc_arr)
    if np.any(sq <= 0.0):
        return np.eye(k), 0, 2

    with nogil:
        for it in range(1, c_max + 1):
            for j in range(k):
                for t in range(k):
                    work[j * k + t] = v[j, t]
            if _cholesky(work, lfac, k) != 0:
                status = 2
                break
            _chol_inverse(lfac, inv_v, k)
            for j in range(k * k):
                v_new[j] = 0.0
            bad = False
            for i in range(n):
                q = 0.0
                for j in range(k):
                    s = 0.0
                    for t in range(k):
                        s += inv_v[j * k + t] * xc[i, t]
                    q += xc[i, j] * s
                if q <= 0.0 or not isfinite(q):
                    bad = True
                    break
                for j in range(k):
                    for t in range(k):
                        v_new[j * k + t] += xc[i, j] * xc[i, t] / q
            if bad:
                status = 2
                break
            for j in range(k):
                for t in range(k):
                    v_new[j * k + t] *= (<double> k) / n
            for j in range(k):
                for t in range(j + 1, k):
                    s = 0.5 * (v_new[j * k + t] + v_new[t * k + j])
                    v_new[j * k + t] = s
                    v_new[t * k + j] = s
            for j in range(k * k):
                work[j] = v_new[j]
            if _cholesky(work, lfac, k) != 0:
                status = 2
                break
            logdet = 0.0
            for j in range(k):
                logdet += 2.0 * log(lfac[j * k + j])
            if not isfinite(logdet):
                status = 2
                break
            norm = exp(logdet / k)
            update = 0.0
            for j in range(k):
                for t in range(k):
                    v_new[j * k + t] /= norm
                    s = v_new[j * k + t] - v[j, t]
                    update += s * s
            for j in range(k):
                for t in range(k):
                    v[j, t] = v_new[j * k + t]
            if sqrt(update) < c_tol:
                status = 0
                break
    if status == 2:
        return v_arr, it, 2
    for j in range(k):
        for t in range(k):
            work[j * k + t] = v[j, t]
    if _jacobi_eigh(work, vecbuf, wbuf, k) < 0:
        return v_arr, it, 2
    if wbuf[0] <= 1e-12 * wbuf[k - 1]:
        return v_arr, it, 2
    return v_arr, it, status


cdef int _joint_round_c(
    double[:, ::1] x,
    double* m,
    double* v,
    Py_ssize_t n,
    int k,
    double eta,
    double* m_new,
    double* v_new,
) noexcept nogil:
    """One alternation round of the joint location/shape fixed point.

    Returns 0 and fills m_new/v_new, or 1 when the data are degenerate
    at the current state. v is symmetrized and determinant-normalized
    first, so the round is well defined on extrapolated states too.
    """
    cdef double a[1024]
    cdef double vec[1024]
    cdef double w[32]
    cdef double half[1024]
    cdef double inv_half[1024]
    cdef double cross[1024]
    cdef double grad[32]
    cdef double target[32]
    cdef double z[32]
    cdef double lfac[1024]
    cdef double work[1024]
    cdef int i_, j, t
    cdef Py_ssize_t i
    cdef Py_ssize_t n_far = 0
    cdef Py_ssize_t n_near
    cdef double scale, r, inv_sum, grad_norm, s, frac, logdet, norm
    for j in range(k):
        for t in range(k):
            a[j * k + t] = 0.5 * (v[j * k + t] + v[t * k + j])
    if _jacobi_eigh(a, vec, w, k) < 0:
        return 1
    if w[0] <= 1e-14 * (w[k - 1] if w[k - 1] > 1e-300 else 1e-300):
        return 1
    scale = 0.0
    for j in range(k):
        scale += log(w[j])
    scale = exp(scale / k)
    for j in range(k):
        w[j] /= scale
    for j in range(k):
        for t in range(k):
            s = 0.0
            r = 0.0
            for i_ in range(k):
                s += vec[j * k + i_] * vec[t * k + i_] / sqrt(w[i_])
                r += vec[j * k + i_] * vec[t * k + i_] * sqrt(w[i_])
            inv_half[j * k + t] = s
            half[j * k + t] = r
    inv_sum = 0.0
    for j in range(k):
        grad[j] = 0.0
        for t in range(k):
            cross[j * k + t] = 0.0
    for i in range(n):
        r = 0.0
        for j in range(k):
            s = 0.0
            for t in range(k):
                s += (x[i, t] - m[t]) * inv_half[t * k + j]
            z[j] = s
            r += s * s
        r = sqrt(r)
        if r > eta:
            n_far += 1
            inv_sum += 1.0 / r
            for j in range(k):
                z[j] /= r
                grad[j] += z[j]
            for j in range(k):
                for t in range(k):
                    cross[j * k + t] += z[j] * z[t]
    if n_far == 0:
        return 1
    n_near = n - n_far
    if n_near == 0:
        for j in range(k):
            target[j] = grad[j] / inv_sum
    else:
        grad_norm = 0.0
        for j in range(k):
            grad_norm += grad[j] * grad[j]
        grad_norm = sqrt(grad_norm)
        if grad_norm <= n_near:
            for j in range(k):
                target[j] = 0.0
        else:
            frac = 1.0 - (<double> n_near) / grad_norm
            for j in range(k):
                target[j] = frac * grad[j] / inv_sum
    for j in range(k):
        s = 0.0
        for t in range(k):
            s += half[j * k + t] * target[t]
        m_new[j] = m[j] + s
    for j in range(k):
        for t in range(k):
            s = 0.0
            for i_ in range(k):
                s += half[j * k + i_] * cross[i_ * k + t]
            work[j * k + t] = s * (<double> k) / n_far
    for j in range(k):
        for t in range(k):
            s = 0.0
            for i_ in range(k):
                s += work[j * k + i_] * half[i_ * k + t]
            v_new[j * k + t] = s
    for j in range(k):
        for t in range(j + 1, k):
            s = 0.5 * (v_new[j * k + t] + v_new[t * k + j])
            v_new[j * k + t] = s
            v_new[t * k + j] = s
    for j in range(k * k):
        work[j] = v_new[j]
    if _cholesky(work, lfac, k) != 0:
        return 1
    logdet = 0.0
    for j in range(k):
        logdet += 2.0 * log(lfac[j * k + j])
    if not isfinite(logdet):
        return 1
    norm = exp(logdet / k)
    for j in range(k * k):
        v_new[j] /= norm
    return 0


cdef int _anchor_probe_c(
    double[:, ::1] x,
    double* m,
    double* v,
    Py_ssize_t n,
    int k,
    double eta,
    double* anchor,
) noexcept nogil:
    """Exact stay-put test at the observation nearest the iterate.

    In the metric of v, an observation is the location fixed point iff
    the unit directions pulled from all non-coincident observations sum
    to a vector no longer than the coincidence count. Fills anchor and
    returns 1 when that observation wins, else 0.
    """
    cdef double a[1024]
    cdef double vec[1024]
    cdef double w[32]
    cdef double inv_half[1024]
    cdef double z_star[32]
    cdef double d[32]
    cdef double pull[32]
    cdef int j, t, i_
    cdef Py_ssize_t i, i_star
    cdef Py_ssize_t n_near = 0
    cdef double scale, r, s, r_min, r_sum, rd, pull_norm
    for j in range(k):
        for t in range(k):
            a[j * k + t] = 0.5 * (v[j * k + t] + v[t * k + j])
    if _jacobi_eigh(a, vec, w, k) < 0:
        return 0
    if w[0] <= 1e-14 * (w[k - 1] if w[k - 1] > 1e-300 else 1e-300):
        return 0
    scale = 0.0
    for j in range(k):
        scale += log(w[j])
    scale = exp(scale / k)
    for j in range(k):
        w[j] /= scale
    for j in range(k):
        for t in range(k):
            s = 0.0
            for i_ in range(k):
                s += vec[j * k + i_] * vec[t * k + i_] / sqrt(w[i_])
            inv_half[j * k + t] = s
    r_min = INFINITY
    r_sum = 0.0
    i_star = 0
    for i in range(n):
        r = 0.0
        for j in range(k):
            s = 0.0
            for t in range(k):
                s += (x[i, t] - m[t]) * inv_half[t * k + j]
            r += s * s
        r = sqrt(r)
        r_sum += r
        if r < r_min:
            r_min = r
            i_star = i
    if not r_min <= 1e-2 * (r_sum / n):
        return 0
    for j in range(k):
        s = 0.0
        for t in range(k):
            s += (x[i_star, t] - m[t]) * inv_half[t * k + j]
        z_star[j] = s
        pull[j] = 0.0
    for i in range(n):
        rd = 0.0
        for j in range(k):
            s = 0.0
            for t in range(k):
                s += (x[i, t] - m[t]) * inv_half[t * k + j]
            d[j] = s - z_star[j]
            rd += d[j] * d[j]
        rd = sqrt(rd)
        if rd > eta:
            for j in range(k):
                pull[j] += d[j] / rd
        else:
            n_near += 1
    if n - n_near == 0:
        return 0
    pull_norm = 0.0
    for j in range(k):
        pull_norm += pull[j] * pull[j]
    pull_norm = sqrt(pull_norm)
    if pull_norm <= <double> n_near:
        for j in range(k):
            anchor[j] = x[i_star, j]
        return 1
    return 0


def joint_fixed_point(x, tol, max_iter):
    """Simultaneous robust location and shape fixed point.

    Alternates one spatial-median step in the metric of the shape with
    one direction-only shape step. The plain alternation contracts
    linearly but its rate can approach one when the location sits next
    to an observation, so once consecutive residual vectors become
    collinear (a single dominant mode) the iterate jumps straight to
    the geometric-series limit; the jump is kept only when it cuts the
    residual by a wide margin. Returns (location, shape, iterations,
    status) with status 0 = converged, 1 = iteration budget exhausted,
    2 = degenerate data.
    """
    cdef object xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double c_tol = float(tol)
    cdef int c_max = int(max_iter)
    cdef Py_ssize_t n = xa.shape[0]
    cdef int k = <int> xa.shape[1]
    if k > _KMAX:
        return _pk.joint_fixed_point(xa, c_tol, c_max)
    if k == 1:
        med, it_, ok = weiszfeld_median(xa, c_tol, c_max)
        return med, np.eye(1), it_, 0 if ok else 1
    cdef double[:, ::1] xv = xa
    cdef double eta = 1e-12 * (1.0 + float(np.abs(xa).max(initial=0.0)))
    cdef object m_arr = np.median(xa, axis=0)
    cdef object v_arr = np.eye(k)
    cdef double[::1] m = m_arr
    cdef double[:, ::1] vmat = v_arr
    cdef double v[1024]
    cdef double m_new[32]
    cdef double v_new[1024]
    cdef double jump_m[32]
    cdef double jump_v[1024]
    cdef double jm_new[32]
    cdef double jv_new[1024]
    cdef double anchor_m[32]
    cdef double f[1056]
    cdef double prev_f[1056]
    cdef bint have_prev = False
    cdef bint same
    cdef int cooldown = 0
    cdef int snaps = 0
    cdef int it = 0
    cdef int status = 1
    cdef int j, t, dim = k + k * k
    cdef double rn, loc_gap, sh_gap, m_scale, v_scale, s
    cdef double prev_sq, dot, f_sq, ratio, align, scale_jump, jrn
    cdef bint jumped_ok

    for j in range(k):
        for t in range(k):
            v[j * k + t] = vmat[j, t]

    with nogil:
        for it in range(1, c_max + 1):
            if _joint_round_c(xv, &m[0], v, n, k, eta, m_new, v_new) != 0:
                status = 2
                break
            m_scale = 0.0
            for j in range(k):
                s = fabs(m_new[j])
                if s > m_scale:
                    m_scale = s
            v_scale = 0.0
            for j in range(k * k):
                s = fabs(v_new[j])
                if s > v_scale:
                    v_scale = s
            loc_gap = 0.0
            for j in range(k):
                s = fabs(m_new[j] - m[j])
                if s > loc_gap:
                    loc_gap = s
            sh_gap = 0.0
            for j in range(k * k):
                s = fabs(v_new[j] - v[j])
                if s > sh_gap:
                    sh_gap = s
            rn = loc_gap / (1.0 + m_scale)
            s = sh_gap / (1.0 + v_scale)
            if s > rn:
                rn = s
            if rn <= c_tol:
                for j in range(k):
                    m[j] = m_new[j]
                for j in range(k * k):
                    v[j] = v_new[j]
                status = 0
                break
            if (it & 15) == 0 and _anchor_probe_c(
                xv, m_new, v_new, n, k, eta, anchor_m
            ) != 0:
                same = True
                for j in range(k):
                    if anchor_m[j] != m_new[j]:
                        same = False
                        break
                if not same:
                    # needing a second snap means the anchored verdict
                    # flipped as the shape evolved: the configuration
                    # straddles the stay-put boundary and no tolerance
                    # can resolve it
                    snaps += 1
                    if snaps >= 2:
                        for j in range(k):
                            m[j] = m_new[j]
                        for j in range(k * k):
                            v[j] = v_new[j]
                        status = 2
                        break
                    for j in range(k):
                        m[j] = anchor_m[j]
                    for j in range(k * k):
                        v[j] = v_new[j]
                    have_prev = False
                    cooldown = 0
                    continue
            for j in range(k):
                f[j] = m_new[j] - m[j]
            for j in range(k * k):
                f[k + j] = v_new[j] - v[j]
            if have_prev and cooldown <= 0:
                prev_sq = 0.0
                dot = 0.0
                f_sq = 0.0
                for j in range(dim):
                    prev_sq += prev_f[j] * prev_f[j]
                    dot += f[j] * prev_f[j]
                    f_sq += f[j] * f[j]
                if prev_sq > 0.0:
                    ratio = dot / prev_sq
                    align = fabs(dot) / (sqrt(f_sq) * sqrt(prev_sq))
                    if align > 0.9999 and 0.2 < fabs(ratio) and fabs(ratio) < 0.99999:
                        scale_jump = 1.0 / (1.0 - ratio)
                        for j in range(k):
                            jump_m[j] = m[j] + scale_jump * f[j]
                        for j in range(k * k):
                            jump_v[j] = v[j] + scale_jump * f[k + j]
                        jumped_ok = (
                            _joint_round_c(
                                xv, jump_m, jump_v, n, k, eta, jm_new, jv_new
                            )
                            == 0
                        )
                        if jumped_ok:
                            m_scale = 0.0
                            for j in range(k):
                                s = fabs(jm_new[j])
                                if s > m_scale:
                                    m_scale = s
                            v_scale = 0.0
                            for j in range(k * k):
                                s = fabs(jv_new[j])
                                if s > v_scale:
                                    v_scale = s
                            loc_gap = 0.0
                            for j in range(k):
                                s = fabs(jm_new[j] - jump_m[j])
                                if s > loc_gap:
                                    loc_gap = s
                            sh_gap = 0.0
                            for j in range(k * k):
                                s = fabs(jv_new[j] - jump_v[j])
                                if s > sh_gap:
                                    sh_gap = s
                            jrn = loc_gap / (1.0 + m_scale)
                            s = sh_gap / (1.0 + v_scale)
                            if s > jrn:
                                jrn = s
                            if jrn < 0.2 * rn:
                                if jrn <= c_tol:
                                    for j in range(k):
                                        m[j] = jm_new[j]
                                    for j in range(k * k):
                                        v[j] = jv_new[j]
                                    status = 0
                                    break
                                for j in range(k):
                                    m[j] = jump_m[j]
                                for j in range(k * k):
                                    v[j] = jump_v[j]
                                have_prev = False
                                cooldown = 3
                                continue
                            cooldown = 25
                        else:
                            cooldown = 25
            for j in range(dim):
                prev_f[j] = f[j]
            have_prev = True
            cooldown -= 1
            for j in range(k):
                m[j] = m_new[j]
            for j in range(k * k):
                v[j] = v_new[j]
    for j in range(k):
        for t in range(k):
            vmat[j, t] = v[j * k + t]
    return m_arr, v_arr, it, status
