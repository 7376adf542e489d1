"""Regenerate crates/core/data/{phi_N.txt,class_polys.txt}.

Modular polynomials are solved exactly from q-expansions of j(tau) and
j(N tau); Hilbert class polynomials are rounded from high-precision
evaluations of j at the CM points of reduced primitive forms.
"""
from fractions import Fraction
from math import gcd
import os
import sys

import mpmath

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")


def series_mul(a, b, m):
    out = [0] * m
    for i, x in enumerate(a):
        if x == 0:
            continue
        for k in range(0, min(m - i, len(b))):
            out[i + k] += x * b[k]
    return out


def j_expansion(m):
    """Coefficients c[k] of q*j(q) = sum c[k] q^k, k < m."""
    sigma3 = [0] * m
    for d in range(1, m):
        for k in range(d, m, d):
            sigma3[k] += d ** 3
    e4 = [1] + [240 * sigma3[k] for k in range(1, m)]
    e4c = series_mul(series_mul(e4, e4, m), e4, m)
    # prod (1 - q^n)^24
    p = [1] + [0] * (m - 1)
    for n in range(1, m):
        for _ in range(24):
            for k in range(m - 1, n - 1, -1):
                p[k] -= p[k - n]
    # q*j = E4^3 / prod(1-q^n)^24
    inv = [0] * m
    inv[0] = 1
    for k in range(1, m):
        inv[k] = -sum(p[i] * inv[k - i] for i in range(1, k + 1))
    return series_mul(e4c, inv, m)


def psi(n):
    r, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            r = r * (p + 1) // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        r = r * (m + 1) // m
    return r


class Laurent:
    """Truncated Laurent series: val = lowest exponent, coeffs list."""

    def __init__(self, val, coeffs):
        self.val, self.c = val, coeffs

    def mul(self, o, top):
        val = self.val + o.val
        n = top - val
        return Laurent(val, series_mul(self.c[:n], o.c[:n], n))


def modular_polynomial(N):
    d = psi(N)
    top = 30
    m = 2 * (top + N * d + d + 5)
    jq = j_expansion(m)
    j1 = Laurent(-1, jq)
    jn_c = [0] * (m * N)
    for k, c in enumerate(jq):
        if k * N < len(jn_c):
            jn_c[k * N] = c
    jN = Laurent(-N, jn_c)
    pw1 = [Laurent(0, [1] + [0] * (m * N))]
    pwN = [Laurent(0, [1] + [0] * (m * N))]
    wide = top + N * d + d + 2
    for _ in range(d):
        pw1.append(pw1[-1].mul(j1, wide))
        pwN.append(pwN[-1].mul(jN, wide))
    unknowns = []
    for a in range(d + 1):
        for b in range(a, d + 1):
            if b == d and a > 0:
                continue
            if (a, b) == (0, d):
                continue
            unknowns.append((a, b))
    low = -(d + N * d)

    def term_series(a, b):
        s = pw1[a].mul(pwN[b], top)
        if a != b:
            s2 = pw1[b].mul(pwN[a], top)
            return [s, s2]
        return [s]

    rows = {}
    def add(series_list, col, sign=1):
        for s in series_list:
            for i, c in enumerate(s.c):
                e = s.val + i
                if e >= top:
                    break
                if c:
                    rows.setdefault(e, {})
                    rows[e][col] = rows[e].get(col, 0) + sign * c
    for idx, (a, b) in enumerate(unknowns):
        add(term_series(a, b), idx)
    # known: X^d + Y^d on the rhs
    add(term_series(0, d), "rhs", -1)
    cols = len(unknowns)
    mat = []
    for e in sorted(rows):
        r = rows[e]
        mat.append([Fraction(r.get(i, 0)) for i in range(cols)] + [Fraction(r.get("rhs", 0))])
    # gaussian elimination
    piv_row = 0
    where = [-1] * cols
    for col in range(cols):
        sel = None
        for r in range(piv_row, len(mat)):
            if mat[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        mat[piv_row], mat[sel] = mat[sel], mat[piv_row]
        pv = mat[piv_row][col]
        mat[piv_row] = [x / pv for x in mat[piv_row]]
        for r in range(len(mat)):
            if r != piv_row and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[piv_row])]
        where[col] = piv_row
        piv_row += 1
    assert all(w >= 0 for w in where), "underdetermined"
    for r in range(piv_row, len(mat)):
        assert mat[r][-1] == 0, "inconsistent"
    coeffs = {(d, 0): 1, (0, d): 1}
    for idx, (a, b) in enumerate(unknowns):
        v = mat[where[idx]][-1]
        assert v.denominator == 1
        v = int(v)
        if v:
            coeffs[(a, b)] = v
            coeffs[(b, a)] = v
    return coeffs


def class_polynomial(D):
    mpmath.mp.dps = 400
    forms = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if b < 0 and a == c:
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            forms.append((a, b, c))
        a += 1
    poly = [mpmath.mpc(1)]
    for (a, b, c) in forms:
        tau = (-b + mpmath.sqrt(mpmath.mpf(D))) / (2 * a)
        jv = 1728 * mpmath.kleinj(tau)
        new = [mpmath.mpc(0)] * (len(poly) + 1)
        for i, x in enumerate(poly):
            new[i + 1] += x
            new[i] -= x * jv
        poly = new
    out = []
    for x in poly:
        r = int(mpmath.nint(x.real))
        assert abs(x.real - r) < mpmath.mpf(10) ** -50, (D, x)
        assert abs(x.imag) < mpmath.mpf(10) ** -50
        out.append(r)
    return out  # ascending


def main():
    for N in range(1, 6):
        if N == 1:
            coeffs = {(1, 0): 1, (0, 1): -1}
        else:
            coeffs = modular_polynomial(N)
        with open(os.path.join(OUT, f"phi_{N}.txt"), "w") as f:
            f.write(f"# classical modular polynomial Phi_{N}: degX degY coeff\n")
            for (a, b) in sorted(coeffs, reverse=True):
                f.write(f"{a} {b} {coeffs[(a, b)]}\n")
    with open(os.path.join(OUT, "class_polys.txt"), "w") as f:
        f.write("# Hilbert class polynomials: D c0 c1 ... ch (ascending degree)\n")
        for n in range(3, 101):
            D = -n
            if D % 4 not in (0, 1):
                continue
            f.write(f"{D} " + " ".join(str(c) for c in class_polynomial(D)) + "\n")


if __name__ == "__main__":
    sys.exit(main())
