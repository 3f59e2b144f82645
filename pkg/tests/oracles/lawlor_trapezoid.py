"""Dense trapezoid + Richardson oracle for the Lawlor angle integrals.

Run as a script to regenerate the frozen constants used in test_lawlor.py.
Uses x = tan(u) on (0, pi/2) and evenness; nothing from the package.
"""
import numpy as np
import mpmath as mp


def _integrands(u, a):
    x = np.tan(u)
    jac = 1.0 / np.cos(u) ** 2
    p = np.prod(1.0 + np.outer(x**2, a), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        big_p = np.where(x > 0, (p - 1.0) / x**2, np.sum(a))
    inv_sqrt = 1.0 / np.sqrt(big_p)
    cols = [a_j / (1.0 + a_j * x**2) * inv_sqrt * jac for a_j in a]
    cols.append(0.5 * inv_sqrt * jac)
    out = np.array(cols)
    # limits at u = pi/2: x^2 sec^2(u) / x^{m+1} ... only m = 3 leaves a nonzero A term
    end = u >= np.pi / 2
    out[:, end] = 0.0
    if len(a) == 3:
        out[-1, end] = 0.5 / np.sqrt(np.prod(a))
    return out


def trapezoid(a, n):
    u = np.linspace(0.0, np.pi / 2, n + 1)
    vals = _integrands(u, np.asarray(a, float))
    h = u[1] - u[0]
    return 2.0 * h * (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1]))


def richardson(a, n=10**6):
    coarse, fine = trapezoid(a, n // 2), trapezoid(a, n)
    return fine + (fine - coarse) / 3.0


def mpmath_values(a, dps=40):
    mp.mp.dps = dps
    a = [mp.mpf(v) for v in a]

    # (p(x) - 1) / x^2 expanded through elementary symmetric sums, no cancellation
    coeffs = [mp.mpf(1)]
    for a_j in a:
        coeffs = [c + (a_j * coeffs[k - 1] if k > 0 else 0) for k, c in enumerate(coeffs + [mp.mpf(0)])]

    def big_p(x):
        x2 = x**2
        return sum(c * x2 ** (k - 1) for k, c in enumerate(coeffs) if k > 0)

    out = [2 * mp.quad(lambda x, a_j=a_j: a_j / ((1 + a_j * x**2) * mp.sqrt(big_p(x))), [0, 1, mp.inf]) for a_j in a]
    out.append(2 * mp.quad(lambda x: 1 / (2 * mp.sqrt(big_p(x))), [0, 1, mp.inf]))
    return [float(v) for v in out]


if __name__ == "__main__":
    for a in [(1.0, 2.0, 3.0), (1.0, 1.0, 1.0)]:
        print(a, "trapezoid", repr(list(richardson(a))))
        print(a, "mpmath   ", repr(mpmath_values(a)))
