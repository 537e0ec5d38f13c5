"""Special-function helpers: terminating hypergeometric sums, Laguerre
recurrences, Meixner-type tables and Gauss-Legendre nodes.

Everything here works in double precision.  The tables are filled by
three-term recurrences rather than by explicit alternating sums, because
the explicit sums lose all significant digits once the first parameter is
a few tens (terms of size 1e20 cancel down to O(1) values).
"""

import numpy as np
from scipy.special import gammaln, logsumexp


def hyp2f1_terminating(n, b, c, z):
    """Gauss series 2F1(-n, b; c; z) for a non-negative integer ``n``.

    Plain finite sum with the term ratio ``(-n+j)(b+j) / ((c+j)(j+1)) z``.
    Fine for small ``n`` or for sums whose terms share one sign; use
    :func:`meixner_table` for whole tables with large ``n``.
    """
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for j in range(int(n)):
        term = term * ((-n + j) * (b + j) / ((c + j) * (j + 1))) * z
        total = total + term
    return total if total.ndim else float(total)


def pochhammer_ratio_coeffs(k, a):
    """Coefficients ``(a)_j (-k)_j / (j!)^2`` for j = 0..k, as (log|.|, sign).

    Used for the terminating series 2F1(a, -k; 1; x).  Returned in log form so
    that k in the thousands does not overflow.
    """
    j = np.arange(k + 1)
    # (-k)_j = (-1)^j k! / (k-j)!
    log_mk = gammaln(k + 1) - gammaln(k - j + 1)
    if a > 0:
        log_a = gammaln(a + j) - gammaln(a)
        sign_a = np.ones(k + 1)
    else:
        raise ValueError("only positive a is supported")
    logc = log_a + log_mk - 2.0 * gammaln(j + 1)
    sign = sign_a * np.where(j % 2 == 0, 1.0, -1.0)
    return logc, sign


def log_binom(n, k):
    """log of the binomial coefficient C(n, k) (array friendly)."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def logsumexp_pos(logterms, axis=-1):
    """log(sum(exp(logterms))) that returns -inf for an all -inf slice."""
    logterms = np.asarray(logterms, dtype=float)
    with np.errstate(invalid="ignore"):
        out = logsumexp(logterms, axis=axis)
    return np.where(np.isnan(out), -np.inf, out)


def meixner_table(nmax, kmax, z, b=1, log_scale=None):
    """Table ``F[n, k] = 2F1(-n, k + b; b; z)`` for 0 <= n <= nmax, 0 <= k <= kmax.

    Written as ``c**n M_n(k; b, c)`` with ``c = 1 - z`` (Meixner polynomials),
    so the degree recurrence

        (n + b) F[n+1] = ((c - 1) k + n + (n + b) c) F[n] - n c F[n-1]

    fills every column at once.  ``log_scale`` (length kmax + 1) multiplies
    column k by ``exp(log_scale[k])`` before the recurrence starts, which keeps
    large tables inside the double range; ``-inf`` gives a zero column.
    """
    if nmax < 0 or kmax < 0:
        raise ValueError("table sizes must be non-negative")
    c = 1.0 - z
    k = np.arange(kmax + 1, dtype=float)
    out = np.empty((nmax + 1, kmax + 1))
    if log_scale is None:
        out[0] = 1.0
    else:
        out[0] = np.exp(np.asarray(log_scale, dtype=float))
    if nmax >= 1:
        out[1] = out[0] * (c - (1.0 - c) * k / b)
    for n in range(1, nmax):
        out[n + 1] = (((c - 1.0) * k + n + (n + b) * c) * out[n] - n * c * out[n - 1]) / (n + b)
    return out


def laguerre_table(pmax, alpha, x, damped=True):
    """Generalized Laguerre polynomials ``L_p^(alpha)(x)`` for p = 0..pmax.

    Ascending three-term recurrence.  With ``damped=True`` every row carries the
    factor ``exp(-x/2)``, which is what displacement matrix elements need and
    keeps the values bounded by one in magnitude for alpha = 0.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((pmax + 1,) + x.shape)
    out[0] = np.exp(-x / 2.0) if damped else 1.0
    if pmax >= 1:
        out[1] = (1.0 + alpha - x) * out[0]
    for p in range(1, pmax):
        out[p + 1] = ((2 * p + 1 + alpha - x) * out[p] - (p + alpha) * out[p - 1]) / (p + 1)
    return out


def gauss_legendre(n, a, b):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), w * half
