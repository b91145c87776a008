"""Conway polynomials and small polynomial arithmetic over F_p.

Polynomials are tuples of coefficients, constant term first.  Bundled
Conway polynomials cover every p^t <= 2^16 with t >= 2; degree one is
computed directly from the least primitive root.  Outside the bundled
range the lexicographically smallest monic irreducible polynomial is used.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from importlib import resources

CONWAY_LIMIT = 2**16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Split q = p^t; raise ValueError if q is not a prime power."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in prime_factors(q)[:1]:
        t = 0
        m = q
        while m % p == 0:
            m //= p
            t += 1
        if m == 1:
            return p, t
    raise ValueError(f"{q} is not a prime power")


# -- polynomial helpers over F_p -------------------------------------------


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mulmod(a, b, f, p):
    """a*b mod (f, p) for monic f."""
    d = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            for i in range(d + 1):
                prod[k - d + i] = (prod[k - d + i] - c * f[i]) % p
    return _trim(prod[:d])


def poly_powmod(a, e, f, p):
    result = [1]
    base = list(a)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, f, p)
        base = poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_mod(a, b, p):
    a = _trim(a)
    b = _trim(b)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % p
        a = _trim(a)
    return a


def _poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(f, p) -> bool:
    """Ben-Or test for a monic polynomial over F_p."""
    f = _trim(f)
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    h = x
    for _ in range(d // 2):
        h = poly_powmod(h, p, f, p)
        g = _poly_gcd(f, _poly_sub(h, x, p), p)
        if len(g) > 1:
            return False
    return True


def is_primitive(f, p) -> bool:
    """x generates the multiplicative group of F_p[x]/(f)."""
    if not is_irreducible(f, p):
        return False
    d = len(f) - 1
    order = p**d - 1
    if d == 1:
        root = (-f[0]) % p
        if root == 0:
            return False
        return all(pow(root, order // ell, p) != 1 for ell in prime_factors(order))
    for ell in prime_factors(order):
        if poly_powmod([0, 1], order // ell, f, p) == [1]:
            return False
    return True


def _from_signed(p, t, a):
    """Monic polynomial x^t - a_{t-1} x^{t-1} + a_{t-2} x^{t-2} - ... ."""
    coeffs = [0] * (t + 1)
    coeffs[t] = 1
    for i in range(t):
        sign = -1 if (t - i) % 2 else 1
        coeffs[i] = (sign * a[i]) % p
    return tuple(coeffs)


def _compatible(f, p, t) -> bool:
    for m in range(1, t):
        if t % m:
            continue
        sub = conway_polynomial(p, m)
        y = poly_powmod([0, 1], (p**t - 1) // (p**m - 1), f, p)
        # Horner evaluation of sub at y modulo f
        acc = []
        for c in reversed(sub):
            acc = poly_mulmod(acc, y, f, p) if acc else [0]
            acc[0] = (acc[0] + c) % p
            acc = _trim(acc)
        if acc:
            return False
    return True


def search_conway(p: int, t: int) -> tuple[int, ...]:
    """Compute the Conway polynomial of degree t over F_p by exhaustive search."""
    for tail in itertools.product(range(p), repeat=t):
        # tail = (a_{t-1}, ..., a_0) in Conway order
        a = tuple(reversed(tail))
        f = _from_signed(p, t, a)
        if f[0] == 0:
            continue
        if is_primitive(f, p) and _compatible(f, p, t):
            return f
    raise ValueError(f"no Conway polynomial found for {p}^{t}")


def smallest_irreducible(p: int, t: int) -> tuple[int, ...]:
    for tail in itertools.product(range(p), repeat=t):
        f = tuple(reversed(tail)) + (1,)
        if is_irreducible(f, p):
            return f
    raise ValueError(f"no irreducible polynomial of degree {t} over F_{p}")


@lru_cache(maxsize=None)
def _bundled() -> dict[tuple[int, int], tuple[int, ...]]:
    text = resources.files("incsnf").joinpath("data/conway.json").read_text()
    raw = json.loads(text)
    return {(int(k.split(",")[0]), int(k.split(",")[1])): tuple(v) for k, v in raw.items()}


@lru_cache(maxsize=None)
def conway_polynomial(p: int, t: int) -> tuple[int, ...]:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if t < 1:
        raise ValueError("degree must be positive")
    if t == 1:
        return search_conway(p, 1)
    table = _bundled()
    if (p, t) in table:
        return table[(p, t)]
    return search_conway(p, t)


def default_modulus(p: int, t: int) -> tuple[int, ...]:
    """Conway polynomial when p^t <= 2^16, else the smallest monic irreducible."""
    if p**t <= CONWAY_LIMIT:
        return conway_polynomial(p, t)
    return smallest_irreducible(p, t)
