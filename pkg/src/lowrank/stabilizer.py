"""Stabilizer groups over the Pauli basis and the ambiguity constructions.

Labels (p, q) are bitmasks over F_2^k; identifying F_2^k with the field
F_{2^k} through a fixed irreducible polynomial yields, for every field
element x, a maximal Abelian subgroup G_x generated by the words
w(b_i, x*b_i).  Character sums over such a group are rank-one projectors,
and two characters that agree on a sampled label set produce a pair of
orthogonal states with identical sampled coefficients, which is the
obstruction behind the sampling lower bound.

Bit conventions: bitmask bit i (value 2^i) is the coefficient of z^i in
the field polynomial; as a Pauli label the same mask is read big-endian,
component j of the label vector sitting at bit k-j.

The identification between label vectors and field elements is pinned to
a trace-self-dual basis of the field (computed deterministically at first
use).  This matters: the commutation phase of two Pauli words is the bit
dot product of their labels, and only in a self-dual basis does that form
equal the field trace form, which is what makes every G_x Abelian.
`gf2k_mul` itself keeps plain polynomial-basis semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bases import pauli_index, pauli_label, pauli_word
from .errors import InvalidInput
from .sampling import stream_rng

# Fixed irreducible polynomials (bitmask includes the leading term).
FIXED_POLYS = {
    1: 0b10,          # z
    2: 0b111,         # z^2 + z + 1
    3: 0b1011,        # z^3 + z + 1
    4: 0b10011,       # z^4 + z + 1
    5: 0b100101,      # z^5 + z^2 + 1
    6: 0b1000011,     # z^6 + z + 1
    7: 0b10000011,    # z^7 + z + 1
    8: 0b100011011,   # z^8 + z^4 + z^3 + z + 1
}


def _clmul(x: int, y: int) -> int:
    out = 0
    while y:
        if y & 1:
            out ^= x
        x <<= 1
        y >>= 1
    return out


def _clmod(x: int, poly: int) -> int:
    deg = poly.bit_length() - 1
    while x.bit_length() - 1 >= deg and x:
        x ^= poly << (x.bit_length() - 1 - deg)
    return x


@dataclass(frozen=True)
class GF2kField:
    """The field F_{2^k} under a pinned irreducible polynomial."""

    k: int
    poly: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput("field degree must be >= 1")
        if self.poly.bit_length() - 1 != self.k:
            raise InvalidInput(f"polynomial degree {self.poly.bit_length() - 1} != k={self.k}")
        if self.k <= 8 and not _is_irreducible(self.poly):
            raise InvalidInput(f"polynomial {bin(self.poly)} is reducible")

    @classmethod
    def default(cls, k: int) -> "GF2kField":
        if k not in FIXED_POLYS:
            raise InvalidInput(f"no pinned polynomial for k={k}")
        return cls(k, FIXED_POLYS[k])

    def mul(self, x: int, y: int) -> int:
        if not (0 <= x < 2**self.k and 0 <= y < 2**self.k):
            raise InvalidInput("field elements out of range")
        return _clmod(_clmul(x, y), self.poly)


def _is_irreducible(poly: int) -> bool:
    deg = poly.bit_length() - 1
    if deg == 1:
        return True
    for d in range(2, 1 << (deg // 2 + 1)):
        if d.bit_length() - 1 < 1:
            continue
        if _clmod(poly, d) == 0:
            return False
    return True


def gf2k_mul(field: GF2kField, x: int, y: int) -> int:
    """Carry-less product reduced modulo the field polynomial."""
    return field.mul(x, y)


def field_trace(field: GF2kField, x: int) -> int:
    """Trace onto the prime field: x + x^2 + x^4 + ...; always 0 or 1."""
    acc, y = 0, x
    for _ in range(field.k):
        acc ^= y
        y = field.mul(y, y)
    if acc not in (0, 1):
        raise InvalidInput("trace left the prime field; polynomial is not irreducible")
    return acc


def _reduce_independent(vectors: list[int]) -> list[int]:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return basis


@lru_cache(maxsize=None)
def self_dual_basis(field: GF2kField) -> tuple:
    """Basis e_1..e_k with trace(e_i e_j) = delta_ij, found greedily.

    The trace form is symmetric, non-degenerate and non-alternating over
    F_2, so an orthonormal basis exists; when the residual complement
    turns alternating the last chosen vector is recombined with a
    hyperbolic pair, which is the standard repair step.
    """
    k = field.k

    def B(a: int, b: int) -> int:
        return field_trace(field, field.mul(a, b))

    onb: list[int] = []
    comp = [1 << i for i in range(k)]
    while comp:
        v = next((w for w in comp if B(w, w) == 1), None)
        if v is not None:
            onb.append(v)
            rest = []
            for c in comp:
                if c == v:
                    continue
                if B(c, v):
                    c ^= v
                if c:
                    rest.append(c)
            comp = _reduce_independent(rest)
            continue
        e = onb.pop()
        u, w = next((ui, wj) for i, ui in enumerate(comp)
                    for wj in comp[i + 1:] if B(ui, wj) == 1)
        new = [e ^ u, e ^ w, e ^ u ^ w]
        rest = []
        for c in comp:
            if c in (u, w):
                continue
            for nv in new:
                if B(c, nv):
                    c ^= nv
            if c:
                rest.append(c)
        onb.extend(new)
        comp = _reduce_independent(rest)
    if len(onb) != k:
        raise InvalidInput("self-dual basis construction failed")
    for i, a in enumerate(onb):
        for j, b in enumerate(onb):
            if B(a, b) != (1 if i == j else 0):
                raise InvalidInput("self-dual basis construction failed")
    return tuple(onb)


@lru_cache(maxsize=None)
def _echelon_rows(field: GF2kField) -> tuple:
    """(field bits, label bits) pairs, triangular by descending leading bit."""
    rows = [(e, 1 << i) for i, e in enumerate(self_dual_basis(field))]
    echelon = []
    while rows:
        rows.sort(reverse=True)
        f, lab = rows.pop(0)
        lead = f.bit_length() - 1
        rows = [(rf ^ f, rl ^ lab) if (rf >> lead) & 1 else (rf, rl)
                for rf, rl in rows]
        echelon.append((f, lab))
    return tuple(echelon)


def label_to_field(field: GF2kField, label: int) -> int:
    out = 0
    for i, e in enumerate(self_dual_basis(field)):
        if (label >> i) & 1:
            out ^= e
    return out


def field_to_label(field: GF2kField, elem: int) -> int:
    out = 0
    for f, lab in _echelon_rows(field):
        if (elem >> (f.bit_length() - 1)) & 1:
            elem ^= f
            out ^= lab
    if elem:
        raise InvalidInput("element outside the field span")
    return out


def label_mul(field: GF2kField, x: int, y: int) -> int:
    """Field product transported to the self-dual label coordinates."""
    prod = field.mul(label_to_field(field, x), label_to_field(field, y))
    return field_to_label(field, prod)


def pauli_w(k: int, p: int, q: int) -> np.ndarray:
    """Unnormalized Pauli word w(p, q); Hermitian, unitary, squares to identity."""
    return pauli_word(k, p, q)


def pauli_product_phase(k: int, p1: int, q1: int, p2: int, q2: int) -> complex:
    """Phase lambda with w(p1,q1) w(p2,q2) = lambda w(p1^p2, q1^q2)."""
    exponent = 0  # power of i, mod 4
    for j in range(k):
        a, b = (p1 >> j) & 1, (q1 >> j) & 1
        c, d = (p2 >> j) & 1, (q2 >> j) & 1
        exponent += a * b + c * d - (a ^ c) * (b ^ d) + 2 * (b * c)
    return (1j) ** (exponent % 4)


def commutation_sign(p1: int, q1: int, p2: int, q2: int) -> int:
    """(-1)^(p1.q2 - q1.p2): +1 iff the two words commute."""
    parity = (bin(p1 & q2).count("1") + bin(q1 & p2).count("1")) % 2
    return -1 if parity else 1


@dataclass(frozen=True)
class StabilizerGroup:
    """Abelian order-2^k Pauli subgroup without -1, tabulated with signs."""

    k: int
    x: int  # field scalar defining the generators w(b, x*b)
    generators: tuple  # ((p, q), ...) for the standard bit basis
    ps: np.ndarray  # (2^k,) element labels p, index == p
    qs: np.ndarray  # (2^k,) matching q = x*p
    signs: np.ndarray  # (2^k,) entries +-1

    @property
    def order(self) -> int:
        return self.ps.shape[0]

    def element(self, p: int) -> np.ndarray:
        """The signed group element with label p."""
        return self.signs[p] * pauli_word(self.k, int(self.ps[p]), int(self.qs[p]))

    def labels(self) -> set:
        return {(int(p), int(q)) for p, q in zip(self.ps, self.qs)}


def build_stabilizer_group(field: GF2kField, x: int) -> StabilizerGroup:
    """The group G_x generated by w(b_i, x*b_i) over the standard bit basis.

    Element signs come from left-to-right generator multiplication, so the
    table is canonical given the generator order b_1 = 2^(k-1), ..., b_k = 1.
    """
    k = field.k
    if not (0 <= x < 2**k):
        raise InvalidInput("x outside the field")
    gens = tuple((1 << (k - 1 - i), label_mul(field, x, 1 << (k - 1 - i)))
                 for i in range(k))
    size = 1 << k
    ps = np.arange(size, dtype=np.int64)
    qs = np.empty(size, dtype=np.int64)
    signs = np.empty(size, dtype=np.int64)
    for p in range(size):
        sign = 1 + 0j
        accp = accq = 0
        for gp, gq in gens:
            if p & gp:
                lam = pauli_product_phase(k, accp, accq, gp, gq)
                accp ^= gp
                accq ^= gq
                sign *= lam
        if abs(sign.imag) > 1e-12:
            raise InvalidInput("generator products left the real Pauli sector")
        qs[p] = accq
        signs[p] = int(round(sign.real))
    ps.setflags(write=False)
    qs.setflags(write=False)
    signs.setflags(write=False)
    return StabilizerGroup(k=k, x=x, generators=gens, ps=ps, qs=qs, signs=signs)


@dataclass(frozen=True)
class GroupCharacter:
    """chi_y(g_p) = (-1)^(y.p) on the group's p-labels."""

    k: int
    y: int

    def __call__(self, p: int) -> int:
        return -1 if bin(self.y & p).count("1") % 2 else 1


def stabilizer_projector(G: StabilizerGroup, chi: GroupCharacter) -> np.ndarray:
    """Rank-one projector 2^-k sum_g chi(g) g."""
    n = 1 << G.k
    out = np.zeros((n, n), dtype=complex)
    for p in range(G.order):
        out += chi(int(G.ps[p])) * G.signs[p] * pauli_word(G.k, int(G.ps[p]), int(G.qs[p]))
    out /= n
    return (out + out.conj().T) / 2


def _span_dim(vectors: list[int]) -> int:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def _orthogonal_pick(span_vectors: list[int], target_bit: int, k: int) -> int:
    """Smallest d orthogonal to all span vectors with d.target_bit = 1."""
    for d in range(1, 1 << k):
        if bin(d & target_bit).count("1") % 2 == 0:
            continue
        if all(bin(d & s).count("1") % 2 == 0 for s in span_vectors):
            return d
    raise InvalidInput("no splitting direction exists")  # unreachable when span < k


@dataclass(frozen=True)
class AmbiguousPair:
    P1: np.ndarray
    P2: np.ndarray
    x: int
    group_elements_in_omega: int
    span_dim: int
    characters: tuple  # (y1, y2)


def find_ambiguous_pair(k: int, omega_labels) -> AmbiguousPair | None:
    """Two orthogonal rank-one projectors agreeing on all sampled coefficients.

    Scans the 2^k disjoint stabilizer groups for one whose element labels
    meet the sampled set in fewer than k elements (falling back to a
    sampled-label span of dimension below k, which is what the character
    split actually needs), then returns the projectors of two characters
    that agree on the intersection.  Returns None only if every group is
    fully pinned down, which cannot happen when |omega| < (n-2) k.
    """
    field = GF2kField.default(k)
    n = 1 << k
    pairs = {pauli_label(int(a), k) for a in omega_labels}
    chosen = None
    # First pass: the literal element-count criterion; second: span dimension.
    for criterion in ("count", "span"):
        for x in range(n):
            hit_ps = [p for p in range(n) if (p, label_mul(field, x, p)) in pairs]
            dim = _span_dim([p for p in hit_ps if p])
            if criterion == "count" and len(hit_ps) < k:
                chosen = (x, hit_ps, dim)
                break
            if criterion == "span" and dim < k:
                chosen = (x, hit_ps, dim)
                break
        if chosen:
            break
    if chosen is None:
        return None
    x, hit_ps, dim = chosen
    span_vectors = [p for p in hit_ps if p]
    target = next(b for i in range(k)
                  if _span_dim(span_vectors + [(b := 1 << (k - 1 - i))]) > dim)
    d = _orthogonal_pick(span_vectors, target, k)
    G = build_stabilizer_group(field, x)
    chi1, chi2 = GroupCharacter(k, 0), GroupCharacter(k, d)
    return AmbiguousPair(P1=stabilizer_projector(G, chi1),
                         P2=stabilizer_projector(G, chi2),
                         x=x, group_elements_in_omega=len(hit_ps), span_dim=dim,
                         characters=(0, d))


@dataclass(frozen=True)
class LowerBoundReport:
    k: int
    m: int
    epsilon: float
    trials: int
    frequency: float  # empirical probability of the ambiguity event
    p_f: float  # printed lower bound on the failure probability
    sigma3: float
    premise_ok: bool  # whether m <= n log2(n) / (1 + epsilon)


def lower_bound_trial(k: int, m: int, epsilon: float, trials: int = 500,
                      seed: int = 0) -> LowerBoundReport:
    """Frequency of the ambiguity event for the pinned projector P(G_0, triv).

    Per trial, m labels are drawn i.i.d.; the event is that fewer than k
    distinct sampled labels belong to the group G_0 (whose words are the
    diagonal ones, labels (p, 0)).
    """
    if k < 1 or m < 0 or epsilon <= 0 or trials < 1:
        raise InvalidInput("parameters must be positive (m may be zero)")
    n = 1 << k
    group_labels = frozenset(pauli_index(p, 0, k) for p in range(n))
    hits = 0
    for j in range(trials):
        if m == 0:
            hits += 1
            continue
        idx = stream_rng(seed, j).integers(1, n * n + 1, size=m)
        distinct = set(int(a) for a in idx) & group_labels
        if len(distinct) < k:
            hits += 1
    freq = hits / trials
    exponent = epsilon**2 / (2.0 * math.log(2.0) * (1.0 + epsilon / 3.0))
    p_f = 1.0 - n ** (-exponent)
    sigma3 = 3.0 * math.sqrt(max(freq * (1.0 - freq), 0.0) / trials)
    premise = m <= n * math.log2(n) / (1.0 + epsilon)
    return LowerBoundReport(k=k, m=m, epsilon=epsilon, trials=trials,
                            frequency=freq, p_f=p_f, sigma3=sigma3,
                            premise_ok=premise)
