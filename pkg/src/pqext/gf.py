"""Arithmetic over GF(p) for small primes, plus Reed-Solomon decoding.

Values are plain ints or int64 numpy arrays; p stays well below 2^15 so
int64 products never overflow.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ParameterError


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("no inverse of 0")
    return pow(a, p - 2, p)


def polyval(coeffs, x: int, p: int) -> int:
    """Evaluate a low-degree-first coefficient list at x."""
    acc = 0
    for c in reversed(list(coeffs)):
        acc = (acc * x + int(c)) % p
    return acc


def polyval_many(coeffs: np.ndarray, xs: np.ndarray, p: int) -> np.ndarray:
    """Rows of coefficients (low-first) evaluated at each x: (rows, len(xs))."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    acc = np.zeros((coeffs.shape[0], xs.size), dtype=np.int64)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        acc = (acc * xs + coeffs[:, k : k + 1]) % p
    return acc


def lagrange_weights(xs, x0: int, p: int) -> np.ndarray:
    """Weights w_i with f(x0) = sum w_i f(x_i) for deg(f) < len(xs)."""
    return _lagrange_cached(tuple(int(x) % p for x in xs), x0 % p, p).copy()


@lru_cache(maxsize=256)
def _lagrange_cached(xs: tuple[int, ...], x0: int, p: int) -> np.ndarray:
    if len(set(xs)) != len(xs):
        raise ParameterError("interpolation points must be distinct")
    ws = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i == j:
                continue
            num = num * ((x0 - xj) % p) % p
            den = den * ((xi - xj) % p) % p
        ws.append(num * inv(den, p) % p)
    return np.array(ws, dtype=np.int64)


def _poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return out


def interpolate(xs, ys, p: int) -> list[int]:
    """Low-degree-first coefficients of the unique poly through the points."""
    coeffs = [0] * len(xs)
    for i in range(len(xs)):
        basis = [1]
        den = 1
        for j in range(len(xs)):
            if i == j:
                continue
            basis = _poly_mul(basis, [(-xs[j]) % p, 1], p)
            den = den * ((xs[i] - xs[j]) % p) % p
        scale = int(ys[i]) * inv(den, p) % p
        for k, c in enumerate(basis):
            coeffs[k] = (coeffs[k] + scale * c) % p
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _solve_linear(a: list[list[int]], b: list[int], p: int) -> list[int] | None:
    """A particular solution of A x = b over GF(p), or None if inconsistent."""
    rows, cols = len(a), len(a[0])
    m = [row[:] + [rhs % p] for row, rhs in zip(a, b)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(cols):
        sel = next((i for i in range(r, rows) if m[i][c] % p), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        iv = inv(m[r][c], p)
        m[r] = [(v * iv) % p for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(vi - f * vr) % p for vi, vr in zip(m[i], m[r])]
        pivots.append((r, c))
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i][cols] % p:
            return None
    x = [0] * cols
    for i, c in pivots:
        x[c] = m[i][cols]
    return x


def _poly_divmod(num, den, p):
    num = list(num)
    den = list(den)
    while len(den) > 1 and den[-1] == 0:
        den.pop()
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [0], num
    out = [0] * (len(num) - dd)
    lead_inv = inv(den[-1], p)
    for k in range(len(num) - dd - 1, -1, -1):
        out[k] = num[k + dd] * lead_inv % p
        for j, c in enumerate(den):
            num[k + j] = (num[k + j] - out[k] * c) % p
    return out, num[:dd] if dd else [0]


def rs_decode(xs, ys, deg: int, p: int):
    """Berlekamp-Welch with erasures: decode a degree-<=deg codeword.

    ``ys[i] is None`` marks an erasure. Corrects up to
    floor((#non-erased - deg - 1) / 2) errors; returns low-first coefficients
    (length deg+1) or None when no codeword is within range.
    """
    pts = [(int(x) % p, int(y) % p) for x, y in zip(xs, ys) if y is not None]
    n = len(pts)
    if n < deg + 1:
        return None
    e_max = (n - deg - 1) // 2

    def _accept(poly):
        bad = sum(1 for x, y in pts if polyval(poly, x, p) != y)
        return bad <= e_max

    head = pts[: deg + 1]
    poly = interpolate([x for x, _ in head], [y for _, y in head], p)
    poly = poly + [0] * (deg + 1 - len(poly))
    if all(polyval(poly, x, p) == y for x, y in pts):
        return poly

    for e in range(1, e_max + 1):
        # Q(x) = P(x) E(x): deg Q <= deg+e, E monic of degree e.
        qn = deg + e + 1
        a_rows, b_rhs = [], []
        for x, y in pts:
            xp = [pow(x, k, p) for k in range(qn)]
            row = xp[:qn] + [(-y * xp[k]) % p for k in range(e)]
            a_rows.append(row)
            b_rhs.append(y * pow(x, e, p) % p)
        sol = _solve_linear(a_rows, b_rhs, p)
        if sol is None:
            continue
        q = sol[:qn]
        ecf = sol[qn:] + [1]
        quot, rem = _poly_divmod(q, ecf, p)
        if any(rem):
            continue
        quot = quot + [0] * (deg + 1 - len(quot))
        if len(quot) > deg + 1 and any(quot[deg + 1 :]):
            continue
        poly = quot[: deg + 1]
        if _accept(poly):
            return poly
    return None
