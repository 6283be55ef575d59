"""High-precision series oracle, independent of the package under test.

Sums the weighted-Poisson series sum_j lam^j / (j!)^nu directly with mpmath
big floats. Used to freeze expected values for the fast float64 code; slow,
so frozen constants are preferred inside the test suite itself.
"""

import mpmath as mp


def _terms(lam, nu, j_max, dps):
    with mp.workdps(dps):
        lam = mp.mpf(str(lam))
        nu = mp.mpf(str(nu))
        log_lam = mp.log(lam)
        out = []
        for j in range(j_max + 1):
            out.append(mp.e ** (j * log_lam - nu * mp.loggamma(j + 1)))
        return out


def hp_log_normalizer(lam, nu, j_max=4000, dps=500):
    with mp.workdps(dps):
        return mp.log(mp.fsum(_terms(lam, nu, j_max, dps)))


def hp_mean_and_variance(lam, nu, j_max=4000, dps=500):
    with mp.workdps(dps):
        ts = _terms(lam, nu, j_max, dps)
        z = mp.fsum(ts)
        m1 = mp.fsum(j * t for j, t in enumerate(ts)) / z
        m2 = mp.fsum(j * j * t for j, t in enumerate(ts)) / z
        return m1, m2 - m1 * m1
