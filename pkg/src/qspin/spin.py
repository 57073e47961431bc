"""The 2^(n-1)-dimensional spin representations with spectral parameter,
their coproduct and antipode-dual actions, and diagram automorphisms on
sign vectors.

Basis vectors are sign tuples (entries +1/-1) of fixed parity, ordered
lexicographically with + before -, so v_(+,...,+) has index 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .cartan import pairing, simple_roots
from .exact import ExactError, ExactMatrix, FIELD, ONE, U, upow

PLUS, MINUS = 1, -1


def parity(signs: tuple) -> int:
    p = 1
    for s in signs:
        p *= s
    return p


@dataclass(frozen=True)
class SpinModule:
    n: int
    eps: int
    basis: tuple = field(compare=False)
    index: dict = field(compare=False, hash=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weight(self, i: int) -> tuple:
        return tuple(Fraction(s, 2) for s in self.basis[i])


@lru_cache(maxsize=None)
def build_spin_module(n: int, eps: int) -> SpinModule:
    if n < 1:
        raise ExactError("rank must be >= 1")
    basis = tuple(s for s in itertools.product((PLUS, MINUS), repeat=n)
                  if parity(s) == eps)
    index = {s: i for i, s in enumerate(basis)}
    return SpinModule(n, eps, basis, index)


def highest_weight_index(M: SpinModule) -> int:
    """Index of v_(+,...,+,eps) (always 0 in the chosen order)."""
    hw = tuple([PLUS] * (M.n - 1) + [M.eps])
    return M.index[hw]


GEN_KINDS = ("e", "f", "t")


def generator_ids(n: int):
    return [(k, i) for i in range(n + 1) for k in GEN_KINDS]


def _slot_flip(signs: tuple, slot: int, want: int):
    """Apply X^{want} at one slot: succeeds when the sign there is -want."""
    if signs[slot] == want:
        return None
    out = list(signs)
    out[slot] = want
    return tuple(out)


def gen_matrix(M: SpinModule, kind: str, idx: int, z=None) -> ExactMatrix:
    """Matrix of a Chevalley generator on the module with spectral parameter.

    `z` multiplies e_0 (and 1/z multiplies f_0); pass a field element, or
    None for the underived action (z = 1).
    """
    n, dim = M.n, M.dim
    out = ExactMatrix(dim, dim)
    zfac = None
    if idx == 0 and z is not None:
        if kind == "e":
            zfac = z
        elif kind == "f":
            zfac = ONE / z

    if kind == "t":
        for j, s in enumerate(M.basis):
            if idx == 0:
                e = -4 * (s[0] + s[1])
            elif idx == n:
                e = 4 * (s[n - 2] + s[n - 1])
            else:
                e = 4 * (s[idx - 1] - s[idx])
            out.set(j, j, upow(e))
        return out

    if kind == "f":
        mat = gen_matrix(M, "e", idx).transpose()
        if zfac is not None:
            mat = mat.scale(zfac)
        return mat

    if kind != "e":
        raise ExactError("unknown generator kind %r" % (kind,))

    # raising patterns: slots and target signs (X^- lowers to -, X^+ raises to +)
    if idx == 0:
        slots, wants = (0, 1), (MINUS, MINUS)
    elif idx == n:
        slots, wants = (n - 2, n - 1), (PLUS, PLUS)
    else:
        slots, wants = (idx - 1, idx), (PLUS, MINUS)

    for j, s in enumerate(M.basis):
        t = s
        ok = True
        for slot, want in zip(slots, wants):
            t = _slot_flip(t, slot, want)
            if t is None:
                ok = False
                break
        if ok:
            out.set(M.index[t], j, ONE if zfac is None else zfac)
    return out


def weight_diag(M: SpinModule, coords: tuple, sign: int = 1) -> ExactMatrix:
    """Diagonal operator q^{sign * (coords | wt v)} (coords in w-basis)."""
    out = ExactMatrix(M.dim, M.dim)
    for j in range(M.dim):
        val = pairing(coords, M.weight(j)) * sign
        e = 8 * val
        if e.denominator != 1:
            raise ExactError("non-integral u-exponent in weight diagonal")
        out.set(j, j, upow(int(e)))
    return out


def antipode_matrix(M: SpinModule, kind: str, idx: int, z=None, inverse_antipode=False):
    """Matrix of a(g) (or a^{-1}(g)) in the representation."""
    t = gen_matrix(M, "t", idx)
    tinv = gen_matrix(M, "t", idx).map_entries(lambda v: ONE / v)
    if kind == "t":
        return tinv
    g = gen_matrix(M, kind, idx, z)
    if kind == "e":
        # a(e) = -t^{-1} e ; a^{-1}(e) = -e t^{-1}
        return (g * tinv).scale(-ONE) if inverse_antipode else (tinv * g).scale(-ONE)
    # a(f) = -f t ; a^{-1}(f) = -t f
    return (t * g).scale(-ONE) if inverse_antipode else (g * t).scale(-ONE)


def dual_action(M: SpinModule, kind: str, idx: int, z=None, sign: int = 1) -> ExactMatrix:
    """pi^{*a^{sign}}_z(g) = (pi_z(a^{sign}(g)))^T on the dual basis."""
    return antipode_matrix(M, kind, idx, z, inverse_antipode=(sign == -1)).transpose()


def coproduct_action(M1: SpinModule, M2: SpinModule, z1, z2, kind: str, idx: int,
                     primed: bool = False) -> ExactMatrix:
    """(pi_{z1} x pi_{z2}) Delta(g), or Delta' = P.Delta when primed."""
    I1 = ExactMatrix.identity(M1.dim)
    I2 = ExactMatrix.identity(M2.dim)
    if kind == "t":
        return gen_matrix(M1, "t", idx).kron(gen_matrix(M2, "t", idx))
    if kind == "e":
        e1 = gen_matrix(M1, "e", idx, z1)
        e2 = gen_matrix(M2, "e", idx, z2)
        t1 = gen_matrix(M1, "t", idx)
        t2 = gen_matrix(M2, "t", idx)
        if not primed:
            return e1.kron(I2) + t1.kron(e2)
        return I1.kron(e2) + e1.kron(t2)
    if kind == "f":
        f1 = gen_matrix(M1, "f", idx, z1)
        f2 = gen_matrix(M2, "f", idx, z2)
        t1inv = gen_matrix(M1, "t", idx).map_entries(lambda v: ONE / v)
        t2inv = gen_matrix(M2, "t", idx).map_entries(lambda v: ONE / v)
        if not primed:
            return f1.kron(t2inv) + I1.kron(f2)
        return t1inv.kron(f2) + f1.kron(I2)
    raise ExactError("unknown generator kind %r" % (kind,))


def dynkin_on_signs(which: str, signs: tuple) -> tuple:
    n = len(signs)
    if which == "s1":
        return tuple([-signs[0]] + list(signs[1:]))
    if which == "s2":
        return tuple(list(signs[:-1]) + [-signs[-1]])
    if which == "s3":
        return tuple(-signs[n - 1 - i] for i in range(n))
    raise ExactError("unknown automorphism %r" % (which,))


def dynkin_module_map(which: str, M: SpinModule) -> tuple:
    """(target module, permutation matrix target<-source) for an automorphism."""
    sample = dynkin_on_signs(which, M.basis[0])
    target = build_spin_module(M.n, parity(sample))
    mat = ExactMatrix(target.dim, M.dim)
    for j, s in enumerate(M.basis):
        mat.set(target.index[dynkin_on_signs(which, s)], j, ONE)
    return target, mat


# -- defining relations -------------------------------------------------------

def check_defining_relations(M: SpinModule, z):
    """Verify the full presentation on generator matrices; returns a list of
    (name, ok, detail) triples, symbolic in the spectral parameter."""
    n = M.n
    roots = simple_roots(n)
    es = {i: gen_matrix(M, "e", i, z) for i in range(n + 1)}
    fs = {i: gen_matrix(M, "f", i, z) for i in range(n + 1)}
    ts = {i: gen_matrix(M, "t", i) for i in range(n + 1)}
    tinvs = {i: ts[i].map_entries(lambda v: ONE / v) for i in range(n + 1)}
    results = []

    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            ok = (ts[i] * ts[j]) == (ts[j] * ts[i])
            results.append(("t%d t%d commute" % (i, j), ok, ""))

    for i in range(n + 1):
        for j in range(n + 1):
            aij = pairing(roots[i], roots[j])
            e = 8 * aij
            lhs = ts[i] * es[j] * tinvs[i]
            ok = lhs == es[j].scale(upow(int(e)))
            results.append(("t%d e%d t%d^-1 weight" % (i, j, i), ok, ""))
            lhs = ts[i] * fs[j] * tinvs[i]
            ok = lhs == fs[j].scale(upow(-int(e)))
            results.append(("t%d f%d t%d^-1 weight" % (i, j, i), ok, ""))

    qdiff = upow(8) - upow(-8)
    for i in range(n + 1):
        for j in range(n + 1):
            comm = es[i] * fs[j] - fs[j] * es[i]
            if i == j:
                target = (ts[i] - tinvs[i]).map_entries(lambda v: v / qdiff)
            else:
                target = ExactMatrix(M.dim, M.dim)
            ok = comm == target
            results.append(("[e%d, f%d]" % (i, j), ok, ""))

    qq = upow(8) + upow(-8)
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                continue
            aij = pairing(roots[i], roots[j])
            if aij == 0:
                ok = (es[i] * es[j]) == (es[j] * es[i])
                results.append(("[e%d, e%d] = 0" % (i, j), ok, ""))
                ok = (fs[i] * fs[j]) == (fs[j] * fs[i])
                results.append(("[f%d, f%d] = 0" % (i, j), ok, ""))
            elif aij == -1:
                lhs = es[i] * es[j] * es[j] - (es[j] * es[i] * es[j]).scale(qq) \
                    + es[j] * es[j] * es[i]
                results.append(("serre e%d e%d" % (i, j), lhs.is_zero(), ""))
                lhs = fs[i] * fs[j] * fs[j] - (fs[j] * fs[i] * fs[j]).scale(qq) \
                    + fs[j] * fs[j] * fs[i]
                results.append(("serre f%d f%d" % (i, j), lhs.is_zero(), ""))
    return results
