"""Cartan data for affine type D: weight coordinates in the orthonormal
basis, pairings, q-integers, conformal weights and diagram automorphisms.

Weights are stored through their classical restrictions as tuples of
Fractions in the orthonormal basis (w_1, ..., w_n); the delta/level
components never enter the finite-dimensional computations here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import ExactError, FIELD, ONE, U, ZERO

LEVEL_ONE_TAGS = ("L0", "L1", "Ln-1", "Ln")


def dual_coxeter(n: int) -> int:
    return 2 * n - 2


def xi_uexp(n: int) -> int:
    """u-exponent of xi = q^(2n-2)."""
    return 8 * (2 * n - 2)


def p_uexp(n: int) -> int:
    """u-exponent of p = q^(4n-2)."""
    return 8 * (4 * n - 2)


@lru_cache(maxsize=None)
def simple_roots(n: int) -> tuple:
    """Classical restrictions of the simple roots alpha_0..alpha_n."""
    roots = []
    theta = [Fraction(0)] * n
    theta[0] = Fraction(1)
    if n >= 2:
        theta[1] = Fraction(1)
    roots.append(tuple(-t for t in theta))  # alpha_0 = delta - theta, restricted
    for i in range(1, n):
        r = [Fraction(0)] * n
        r[i - 1] = Fraction(1)
        r[i] = Fraction(-1)
        roots.append(tuple(r))
    r = [Fraction(0)] * n
    r[n - 2] = Fraction(1)
    r[n - 1] = Fraction(1)
    roots.append(tuple(r))
    return tuple(roots)


def cartan_matrix(n: int) -> tuple:
    roots = simple_roots(n)
    return tuple(tuple(int(pairing(a, b)) for b in roots) for a in roots)


@dataclass(frozen=True)
class CartanData:
    n: int

    @property
    def cartan(self):
        return cartan_matrix(self.n)

    @property
    def dual_coxeter(self):
        return dual_coxeter(self.n)

    @property
    def xi_uexp(self):
        return xi_uexp(self.n)

    @property
    def p_uexp(self):
        return p_uexp(self.n)


def pairing(l, m) -> Fraction:
    """The invariant bilinear form in orthonormal coordinates."""
    if len(l) != len(m):
        raise ExactError("rank mismatch in weight pairing")
    return sum((Fraction(a) * Fraction(b) for a, b in zip(l, m)), Fraction(0))


def fundamental_weight(n: int, i: int) -> tuple:
    """Classical restriction of Lambda_i (1 <= i <= n); i = 0 gives 0."""
    if i == 0:
        return tuple([Fraction(0)] * n)
    if i <= n - 2:
        return tuple([Fraction(1)] * i + [Fraction(0)] * (n - i))
    half = Fraction(1, 2)
    if i == n - 1:
        return tuple([half] * (n - 1) + [-half])
    if i == n:
        return tuple([half] * n)
    raise ExactError("fundamental weight index out of range")


def two_rho(n: int) -> tuple:
    """2*rho-bar = (2n-2, 2n-4, ..., 2, 0)."""
    return tuple(Fraction(2 * n - 2 - 2 * i) for i in range(n))


def two_rho_prime(n: int) -> tuple:
    """The shifted Weyl vector of the rank-(n-1) subalgebra on slots 2..n:
    (0, 2n-4, 2n-6, ..., 2, 0), i.e. twice the displayed half-integral
    vector (0, n-2, ..., 1, 0)."""
    return tuple([Fraction(0)] + [Fraction(2 * n - 2 - 2 * i) for i in range(1, n)])


def fundamental_weights(n: int):
    """All Lambda-bar_i (i = 1..n) plus 2*rho-bar and 2*rho-bar-prime."""
    return ([fundamental_weight(n, i) for i in range(1, n + 1)],
            two_rho(n), two_rho_prime(n))


def level_one_classical(tag: str, n: int) -> tuple:
    idx = {"L0": 0, "L1": 1, "Ln-1": n - 1, "Ln": n}[tag]
    return fundamental_weight(n, idx)


def conformal_weight(tag: str, n: int) -> Fraction:
    """Delta_lambda = (l | l + 2 rho) / (2 (h_vee + 1)) for level-one lambda."""
    lam = level_one_classical(tag, n)
    tr = two_rho(n)
    num = pairing(lam, lam) + pairing(lam, tr)
    return num / (2 * (dual_coxeter(n) + 1))


def q_integer(m: int):
    """[m]_q = (q^m - q^-m)/(q - q^-1) as a Laurent polynomial in u."""
    if m == 0:
        return ZERO
    if m < 0:
        return -q_integer(-m)
    acc = ZERO
    for j in range(m):
        acc = acc + U ** (8 * (m - 1 - 2 * j))
    return acc


def q_binomial(i: int, j: int):
    """Gaussian binomial [i choose j]_q via the quotient of q-integers."""
    if j < 0:
        raise ExactError("q-binomial lower index must be >= 0")
    if j == 0:
        return ONE
    num = ONE
    for t in range(j):
        num = num * q_integer(i - t)
    den = ONE
    for t in range(1, j + 1):
        den = den * q_integer(t)
    return num / den


# -- Dynkin diagram automorphisms --------------------------------------------

def dynkin_index_map(which: str, i: int, n: int) -> int:
    if not 0 <= i <= n:
        raise ExactError("node index out of range")
    if which == "s1":
        return 1 - i if i in (0, 1) else i
    if which == "s2":
        return 2 * n - i - 1 if i in (n - 1, n) else i
    if which == "s3":
        return n - i
    raise ExactError("unknown automorphism %r" % (which,))


def dynkin_weight_map(which: str, tag: str, n: int) -> str:
    idx = {"L0": 0, "L1": 1, "Ln-1": n - 1, "Ln": n}[tag]
    out = dynkin_index_map(which, idx, n)
    names = {0: "L0", 1: "L1", n - 1: "Ln-1", n: "Ln"}
    if out not in names:
        raise ExactError("automorphism leaves the level-one set")
    return names[out]


def dynkin_classical_map(which: str, coords: tuple) -> tuple:
    """Induced map on orthonormal weight coordinates."""
    n = len(coords)
    if which == "s1":
        return tuple([-coords[0]] + list(coords[1:]))
    if which == "s2":
        return tuple(list(coords[:-1]) + [-coords[-1]])
    if which == "s3":
        return tuple(-coords[n - 1 - i] for i in range(n))
    raise ExactError("unknown automorphism %r" % (which,))
