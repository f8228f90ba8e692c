"""SL2(Z): elements, minus continued fractions, generator words, cosets.

Every element with c != 0 factors as +- T^m S T^{a_l} ... S T^{a_0} where
(( a_0, ..., a_l )) is the minus continued fraction of d/c.  The ceiling
variant is used throughout, so a_i >= 2 for i >= 1 and the expansion is
canonical; the word length grows logarithmically in |c| + |d|.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import DegreeMismatch, NotInSubgroup


class GroupElement:
    """2x2 integer matrix of determinant 1."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        if a * d - b * c != 1:
            raise DegreeMismatch(f"determinant of [[{a},{b}],[{c},{d}]] is not 1")
        self.a, self.b, self.c, self.d = int(a), int(b), int(c), int(d)

    def __mul__(self, other):
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self):
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __eq__(self, other):
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __neg__(self):
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_json(self):
        return [[self.a, self.b], [self.c, self.d]]

    @classmethod
    def from_json(cls, data):
        (a, b), (c, d) = data
        return cls(a, b, c, d)

    def __repr__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


IDENTITY = GroupElement(1, 0, 0, 1)
S = GroupElement(0, -1, 1, 0)
T = GroupElement(1, 1, 0, 1)


def t_power(m: int) -> GroupElement:
    return GroupElement(1, m, 0, 1)


def minus_cf(d: int, c: int):
    """Minus continued fraction of d/c: d/c = a_0 - 1/(a_1 - 1/(...)).

    Ceilings at every step give the canonical expansion with a_i >= 2 for
    i >= 1.  Raises on c = 0.
    """
    if c == 0:
        raise DegreeMismatch("minus continued fraction needs a nonzero denominator")
    terms = []
    num, den = d, c
    while True:
        q = -((-num) // den)  # ceil(num / den)
        terms.append(q)
        rem = q * den - num  # q - num/den = rem/den with 0 <= rem < den... up to sign
        if rem == 0:
            break
        # d/c = q - 1/(den/rem)
        num, den = den, rem
    return terms


def minus_cf_eval(terms):
    """Evaluate (( a_0, ..., a_l )) back to a Fraction."""
    from fractions import Fraction

    val = Fraction(terms[-1])
    for a in reversed(terms[:-1]):
        val = Fraction(a) - 1 / val
    return val


@dataclass(frozen=True)
class WordDecomposition:
    """gamma = sign * T^m * S T^{e_l} ... S T^{e_0} with exponents stored
    innermost-last: exponents = (e_l, ..., e_0)."""

    sign: int
    m: int
    exponents: tuple

    def reconstruct(self) -> GroupElement:
        g = t_power(self.m)
        for e in self.exponents:
            g = g * S * t_power(e)
        return g if self.sign == 1 else -g

    def letters(self):
        """Flatten to [('T', m), ('S', 1), ('T', e_l), ...] skipping zero T's."""
        out = []
        if self.m:
            out.append(("T", self.m))
        for e in self.exponents:
            out.append(("S", 1))
            if e:
                out.append(("T", e))
        return out


def word_decompose(g: GroupElement) -> WordDecomposition:
    """Canonical S,T word of a group element via the minus continued fraction."""
    if g.c == 0:
        if g.a == 1:
            return WordDecomposition(1, g.b, ())
        return WordDecomposition(-1, -g.b, ())
    terms = minus_cf(g.d, g.c)
    # with d/c = ((a_0, ..., a_l)), the product S T^{a_l} ... S T^{a_0} has the
    # same bottom row as +-gamma; peel it off to find m and the sign.
    w = IDENTITY
    for e in terms:  # terms are (a_0, ..., a_l); build innermost first
        w = S * t_power(e) * w
    # now w = S T^{a_l} ... S T^{a_0}? No: loop composed left-multiplications in
    # reverse order; w = S T^{a_0} at first step, then S T^{a_1} S T^{a_0}, ...
    # final w = S T^{a_l} ... S T^{a_0} as required.
    rest = g * w.inv()
    if rest.c != 0:
        raise AssertionError("word decomposition lost the lower-triangular part")
    if rest.a == 1:
        return WordDecomposition(1, rest.b, tuple(reversed(terms)))
    return WordDecomposition(-1, -rest.b, tuple(reversed(terms)))


# ---------------------------------------------------------------------------
# congruence subgroups


class Subgroup:
    """Gamma_0(N) or Gamma(N), with membership test and canonical coset tags."""

    def __init__(self, kind: str, level: int):
        if level < 1:
            raise DegreeMismatch("level must be >= 1")
        if kind not in ("gamma0", "gamma"):
            raise DegreeMismatch(f"unknown subgroup kind {kind!r}")
        self.kind = kind
        self.level = int(level)

    def contains(self, g: GroupElement) -> bool:
        n = self.level
        if self.kind == "gamma0":
            return g.c % n == 0
        return (g.a - 1) % n == 0 and (g.d - 1) % n == 0 and g.b % n == 0 and g.c % n == 0

    def coset_tag(self, g: GroupElement):
        """Canonical invariant of the right coset (subgroup)*g."""
        n = self.level
        if self.kind == "gamma":
            return (g.a % n, g.b % n, g.c % n, g.d % n)
        # Gamma_0(N)\SL2(Z) ~ P^1(Z/N) via the bottom row up to units
        c, d = g.c % n, g.d % n
        best = None
        for u in range(1, n + 1):
            if gcd(u, n) != 1:
                continue
            cand = ((u * c) % n, (u * d) % n)
            if best is None or cand < best:
                best = cand
        return best

    def index(self) -> int:
        n = self.level
        if n == 1:
            return 1
        if self.kind == "gamma0":
            out = n
            for p in _prime_divisors(n):
                out = out * (p + 1) // p
            return out
        out = n ** 3
        for p in _prime_divisors(n):
            out = out * (p * p - 1) // (p * p)
        # Gamma(N) for N <= 2 contains -I; the coset count is |SL2(Z/N)|
        return out

    def __repr__(self):
        return f"{self.kind}({self.level})"

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and self.kind == other.kind
            and self.level == other.level
        )

    def __hash__(self):
        return hash((self.kind, self.level))


def _prime_divisors(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class CosetTable:
    """Right-coset representatives of subgroup\\SL2(Z) with Schreier data.

    BFS from the identity under right multiplication by S and T; ordering is
    by discovery, identity first.  For representatives beta and generators g,
    schreier[(i, g)] = (j, h) with beta_i g = h beta_j and h in the subgroup.
    """

    def __init__(self, subgroup: Subgroup):
        self.subgroup = subgroup
        reps = [IDENTITY]
        tags = {subgroup.coset_tag(IDENTITY): 0}
        schreier = {}
        frontier = [0]
        gens = (("S", S), ("T", T))
        while frontier:
            new_frontier = []
            for i in frontier:
                for name, g in gens:
                    x = reps[i] * g
                    tag = subgroup.coset_tag(x)
                    j = tags.get(tag)
                    if j is None:
                        j = len(reps)
                        tags[tag] = j
                        reps.append(x)
                        new_frontier.append(j)
                    h = x * reps[j].inv()
                    if not subgroup.contains(h):
                        raise AssertionError("coset tag collision")
                    schreier[(i, name)] = (j, h)
            frontier = new_frontier
        self.reps = reps
        self._tags = tags
        self.schreier = schreier

    def __len__(self):
        return len(self.reps)

    def index_of(self, g: GroupElement) -> int:
        """Index j with (subgroup) g = (subgroup) reps[j]."""
        j = self._tags.get(self.subgroup.coset_tag(g))
        if j is None:
            raise AssertionError("element escaped the coset table")
        return j

    def decompose(self, g: GroupElement):
        """(h, j) with g = h * reps[j], h in the subgroup."""
        j = self.index_of(g)
        h = g * self.reps[j].inv()
        if not self.subgroup.contains(h):
            raise NotInSubgroup(f"{g} is not reachable from the table")
        return h, j

    def schreier_generators(self):
        """Generating set of the subgroup: beta_i g (overline(beta_i g))^-1."""
        seen = []
        have = set()
        for (i, name), (j, h) in sorted(
            self.schreier.items(), key=lambda kv: (kv[0][0], kv[0][1])
        ):
            if h == IDENTITY or h in have or -h in have:
                continue
            have.add(h)
            seen.append(h)
        return seen


_COSET_CACHE = {}


def coset_table(subgroup: Subgroup) -> CosetTable:
    key = (subgroup.kind, subgroup.level)
    if key not in _COSET_CACHE:
        _COSET_CACHE[key] = CosetTable(subgroup)
    return _COSET_CACHE[key]


def enumerate_cosets(subgroup: Subgroup):
    """Representatives of subgroup\\SL2(Z), identity first, discovery order."""
    return list(coset_table(subgroup).reps)


# ---------------------------------------------------------------------------
# Gamma_infinity orbit enumeration for Poincare series


def enumerate_gamma_infty_orbit(bound: int):
    """One (c, d) per Gamma_infinity-orbit: coprime pairs with 0 <= c <= bound,
    |d| <= bound, (c, d) ~ (-c, -d); c = 0 contributes only (0, 1).

    Sorted by |c| + |d|, then lexicographically: a deterministic summation
    order for lattice sums.
    """
    if bound < 1:
        raise DegreeMismatch("bound must be >= 1")
    pairs = [(0, 1)]
    for c in range(1, bound + 1):
        for d in range(-bound, bound + 1):
            if gcd(c, abs(d)) == 1:
                pairs.append((c, d))
    pairs.sort(key=lambda cd: (abs(cd[0]) + abs(cd[1]), cd))
    return pairs


def complete_to_sl2(c: int, d: int) -> GroupElement:
    """Some gamma in SL2(Z) with bottom row (c, d)."""
    if gcd(abs(c), abs(d)) != 1:
        raise DegreeMismatch(f"({c}, {d}) is not coprime")
    a, b = _bezout(d, -c)
    return GroupElement(a, b, c, d)


def _bezout(x, y):
    """(a, b) with a*x + b*y = gcd; normalized to determinant-1 use."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t
