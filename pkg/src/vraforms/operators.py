"""Covariant operators between types: the raising operator R_k and its powers,
the symmetric-power pairing, the Clebsch-Gordan embedding, the almost
holomorphic W operator, and the Kuga-Shimura description of M_k(sym^d).

Jets are finite expansions sum_j g_j(tau) (X - tau)^j; this coordinate system
is primary, plain-X coordinates are derived views.  Two coefficient flavors:

* PolyJet: g_j are polynomials in tau over Q (raw d/dtau, all exact);
* SeriesJet: g_j are q-expansions; d/dtau = (2 pi i) theta, and the power of
  2 pi i is tracked per level so coefficients stay rational.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import (
    DegreeMismatch,
    DepthExceeded,
    HypothesisViolated,
    PrecisionExhausted,
    UnsupportedTree,
)
from .exact import ONE, ZERO, PiScalar, Poly, rat
from .qexp import (
    QSeries,
    VectorQSeries,
    classical_qexp,
    dim_mk,
    mk_basis,
    tau_poly,
)
from .types import ArithType, sym_power


def _qpoly(coeffs):
    return Poly([rat(c) for c in coeffs], var="t")


class PolyJet:
    """sum_j g_j(tau) (X - tau)^j with polynomial coefficients, weight k."""

    def __init__(self, weight, levels):
        self.weight = weight
        self.levels = {j: p for j, p in levels.items() if not p.is_zero()}

    @classmethod
    def from_poly(cls, coeffs, weight):
        return cls(weight, {0: _qpoly(coeffs)})

    def depth(self):
        return max(self.levels, default=0)

    def raise_once(self):
        k = self.weight
        out = {}
        for j, g in self.levels.items():
            out[j + 1] = out.get(j + 1, _qpoly([])) + g.deriv()
            out[j] = out.get(j, _qpoly([])) - rat(j + k) * g
        return PolyJet(k + 1, out)

    def raised(self, times):
        out = self
        for _ in range(times):
            out = out.raise_once()
        return out

    def lowered(self, k):
        """Left inverse of the single raising step from weight k (k != 0)."""
        if k == 0:
            raise DegreeMismatch("the raising operator has no left inverse at weight 0")
        return PolyJet(
            k, {j: g * Fraction(j - 1, k) for j, g in self.levels.items()}
        )

    def multiply_invariant(self, kappa):
        """Multiply by (X - tau)^kappa: shifts levels, drops weight by kappa."""
        return PolyJet(
            self.weight - kappa, {j + kappa: g for j, g in self.levels.items()}
        )

    def to_x_coefficients(self, degree):
        """Coefficients in the monomial basis 1, X, ..., X^degree: entries are
        tau-polynomials."""
        out = [_qpoly([]) for _ in range(degree + 1)]
        for j, g in self.levels.items():
            if j > degree:
                raise DegreeMismatch("jet level exceeds the requested symmetric power")
            for i in range(j + 1):
                shift = _qpoly([ZERO] * (j - i) + [Fraction(comb(j, i) * (-1) ** (j - i))])
                out[i] = out[i] + g * shift
        return out

    def __eq__(self, other):
        keys = set(self.levels) | set(other.levels)
        return all(
            self.levels.get(j, _qpoly([])) == other.levels.get(j, _qpoly([]))
            for j in keys
        )

    def __repr__(self):
        return "PolyJet(w=%s; %s)" % (
            self.weight,
            ", ".join(f"(X-t)^{j}: {g!r}" for j, g in sorted(self.levels.items())),
        )


def raise_power_closed(jet: PolyJet, d: int) -> PolyJet:
    """R^d_k via the closed formula
    sum_j C(d, j) [(k+d-1)!/(k+j-1)!] (-1)^(d-j) (X - tau)^j  d^j/dtau^j,
    with the factorial ratio read as prod_{t=j}^{d-1} (k + t)."""
    if set(jet.levels) - {0}:
        raise DegreeMismatch("closed raising formula applies to plain functions")
    k = jet.weight
    f = jet.levels.get(0, _qpoly([]))
    out = {}
    df = f
    for j in range(d + 1):
        ratio = ONE
        for t in range(j, d):
            ratio *= k + t
        c = Fraction(comb(d, j)) * ratio * (-1) ** (d - j)
        if c:
            out[j] = out.get(j, _qpoly([])) + c * df
        df = df.deriv()
    return PolyJet(k + d, out)


class SeriesJet:
    """sum_j (2 pi i)^(e_j) g_j(tau) (X - tau)^j with q-expansion coefficients.

    Levels map j -> (QSeries, e_j).  Raising keeps the grading aligned: the
    derivative of level j - 1 and the multiple of level j land on level j with
    the same 2 pi i power whenever the jet came from p_kappa R^d f.
    """

    def __init__(self, weight, levels):
        self.weight = weight
        self.levels = {}
        for j, (g, e) in levels.items():
            if not g.is_zero():
                self.levels[j] = (g, e)

    @classmethod
    def from_series(cls, f: QSeries):
        return cls(f.weight, {0: (f, 0)})

    def depth(self):
        return max(self.levels, default=0)

    def raise_once(self):
        k = self.weight
        out = {}

        def add(j, g, e):
            if g.is_zero():
                return
            if j in out:
                g0, e0 = out[j]
                if e0 != e:
                    raise DegreeMismatch("misaligned 2*pi*i grading in jet sum")
                out[j] = (g0 + g, e0)
            else:
                out[j] = (g, e)

        for j, (g, e) in self.levels.items():
            th = g.theta()
            th.weight = g.weight  # bookkeeping: weight tracked on the jet
            add(j + 1, th, e + 1)
            add(j, g * Fraction(-(j + k)), e)
        return SeriesJet(k + 1, out)

    def raised(self, times):
        out = self
        for _ in range(times):
            out = out.raise_once()
        return out

    def multiply_invariant(self, kappa):
        return SeriesJet(
            self.weight - kappa, {j + kappa: ge for j, ge in self.levels.items()}
        )

    def multiply_series(self, f: QSeries):
        return SeriesJet(
            self.weight + f.weight,
            {j: (f * g, e) for j, (g, e) in self.levels.items()},
        )

    def add(self, other):
        if self.weight != other.weight:
            raise DegreeMismatch("jet weights differ")
        out = dict(self.levels)
        for j, (g, e) in other.levels.items():
            if j in out:
                g0, e0 = out[j]
                if e0 != e:
                    raise DegreeMismatch("misaligned 2*pi*i grading in jet sum")
                out[j] = (g0 + g, e0)
            else:
                out[j] = (g, e)
        return SeriesJet(self.weight, out)

    def to_vector_qseries(self, d: int) -> VectorQSeries:
        """Expand into the sym^d monomial basis; coefficients become
        tau-polynomials over Q[w, w^-1]."""
        if self.depth() > d:
            raise DegreeMismatch("jet does not fit in sym^%d" % d)
        n0 = min((g.n0 for g, _ in self.levels.values()), default=0)
        n_max = min((g.n_max for g, _ in self.levels.values()), default=-1)
        rows = []
        for n in range(n0, n_max + 1):
            vec = []
            for i in range(d + 1):
                coeffs = [PiScalar() for _ in range(d + 1)]
                for j, (g, e) in self.levels.items():
                    if i > j:
                        continue
                    c = g.coeff(n) if g.n0 <= n <= g.n_max else ZERO
                    if c:
                        coeffs[j - i] = coeffs[j - i] + PiScalar.of(
                            c * comb(j, i) * (-1) ** (j - i), e
                        )
                vec.append(tau_poly(coeffs))
            rows.append(vec)
        return VectorQSeries(sym_power(d), self.weight, rows, n0)

    def eval_numeric(self, d: int, tau: complex, n_cut=None):
        """Value in the sym^d monomial basis at tau."""
        import cmath

        w = 2j * cmath.pi
        out = [0j] * (d + 1)
        for j, (g, e) in self.levels.items():
            val, _ = g.eval_numeric(tau, n_cut)
            val *= w ** e
            for i in range(j + 1):
                out[i] += val * comb(j, i) * (-tau) ** (j - i)
        return out

    def __repr__(self):
        return "SeriesJet(w=%s; levels %s)" % (self.weight, sorted(self.levels))


def raise_series_closed(f: QSeries, d: int) -> SeriesJet:
    """R^d_k on a q-expansion via the closed power formula."""
    k = f.weight
    out = {}
    df, e = f, 0
    for j in range(d + 1):
        ratio = ONE
        for t in range(j, d):
            ratio *= k + t
        c = Fraction(comb(d, j)) * ratio * (-1) ** (d - j)
        if c:
            g = df * c
            out[j] = (g, e)
        nxt = df.theta()
        nxt.weight = df.weight
        df, e = nxt, e + 1
    return SeriesJet(k + d, out)


# ---------------------------------------------------------------------------
# pairing and Clebsch-Gordan


def sym_pairing(p: Poly, q: Poly, d: int):
    """<X^i, Y^j> = (-1)^j / C(d, i) if i + j = d, else 0; extended bilinearly."""
    if p.degree > d or q.degree > d:
        raise DegreeMismatch("pairing arguments exceed the symmetric power degree")
    out = ZERO
    for i in range(d + 1):
        a = p.coeff(i)
        b = q.coeff(d - i)
        if a and b:
            out += a * b * Fraction((-1) ** (d - i), comb(d, i))
    return out


def pair_substitute(p: Poly, d: int) -> Poly:
    """<p(X), (Y - X)^d> = p(Y): variable substitution through the pairing.

    With the displayed kernel (X - Y)^d the pairing returns (-1)^d p(Y); the
    (Y - X)^d kernel is the sign convention under which substitution holds
    on the nose, and it is the one used for extension corners.
    """
    if p.degree > d:
        raise DegreeMismatch("polynomial exceeds the symmetric power degree")
    out = []
    for j in range(d + 1):
        # coefficient of Y^j in <p, (Y - X)^d>: pair p against the X-content
        kernel = Poly(
            [ZERO] * (d - j) + [Fraction(comb(d, j) * (-1) ** (d - j))], p.var
        )
        out.append(sym_pairing(p, kernel, d))
    return Poly(out, "Y")


def clebsch_gordan(p: Poly, d: int, dp: int):
    """Equivariant embedding Poly(Y, d + dp) -> Poly(X, d) (x) Poly(X', dp).

    Normalized to agree exactly with R^d at weight -(d + dp) on polynomials in
    tau, which pins the embedding uniquely; returns {(i, j): coefficient}.
    """
    big = d + dp
    if p.degree > big:
        raise DegreeMismatch("polynomial exceeds d + d'")
    jet = PolyJet.from_poly([p.coeff(i) for i in range(big + 1)], -big).raised(d)
    # expand (X - tau)^j and read tau as the second variable X'; terms beyond
    # the (d, dp) bidegree cancel between levels
    out = {}
    for j, g in jet.levels.items():
        if j > d:
            raise DegreeMismatch("raising left the expected bidegree")
        for i in range(j + 1):
            sign = Fraction(comb(j, i) * (-1) ** (j - i))
            for t, c in enumerate(g.coeffs):
                if c:
                    key = (i, t + j - i)
                    out[key] = out.get(key, ZERO) + c * sign
    if any(v and j > dp for (_, j), v in out.items()):
        raise DegreeMismatch("raising left the expected bidegree")
    return {k: v for k, v in out.items() if v}


def clebsch_gordan_matrix(d: int, dp: int):
    """Matrix of the embedding on monomial bases, columns indexed by Y^n,
    rows by X^i X'^j in lexicographic Kronecker order."""
    big = d + dp
    rows = (d + 1) * (dp + 1)
    out = [[ZERO] * (big + 1) for _ in range(rows)]
    for n in range(big + 1):
        img = clebsch_gordan(Poly([ZERO] * n + [ONE], "Y"), d, dp)
        for (i, j), c in img.items():
            out[i * (dp + 1) + j][n] = c
    return out


# ---------------------------------------------------------------------------
# the W operator: almost holomorphic <-> sym^d-valued holomorphic


def w_forward(components, weight):
    """components = [f_0, ..., f_d] with f = sum_j y^{-j} f_j(tau); returns
    jet levels {d - j: (-2i)^j f_j} of the sym^d-valued image, weight - d."""
    d = len(components) - 1
    levels = {}
    for j, f in enumerate(components):
        levels[d - j] = ((-2j) ** j, f)
    return {"weight": weight - d, "depth": d, "levels": levels}


def w_inverse(jet, weight=None):
    """Inverse of w_forward: recover the y^{-j} components exactly."""
    d = jet["depth"]
    out = []
    for j in range(d + 1):
        scalar, f = jet["levels"][d - j]
        out.append((scalar / ((-2j) ** j), f))
    return [f if abs(s - 1) < 1e-15 else (s, f) for s, f in out]


# ---------------------------------------------------------------------------
# Kuga-Shimura basis and dimensions


def ks_hypothesis(k: int, d: int) -> bool:
    return (k + d) % 2 == 1 or k > d or k < -d


def kuga_shimura_component(k: int, d: int, j: int, f: QSeries) -> SeriesJet:
    """p_{(d+j)/2} R^{(d-j)/2}_{k+j} f for f of weight k + j."""
    kappa = (d + j) // 2
    r = (d - j) // 2
    jet = SeriesJet.from_series(f).raised(r)
    return jet.multiply_invariant(kappa)


def kuga_shimura_basis(k: int, d: int, prec: int, as_series=True):
    """Basis of M_k(sym^d) from classical forms through weights k-d .. k+d.

    Requires k + d odd, k > d, or k < -d.  Output order: j increasing, then
    the monomial basis of M_{k+j}; exact linear independence is verified.
    """
    if not ks_hypothesis(k, d):
        raise HypothesisViolated(
            f"(k, d) = ({k}, {d}) admits no Kuga-Shimura normal form"
        )
    margin = prec + (d - (-d)) // 2 + 2
    out = []
    for j in range(-d, d + 1, 2):
        for f in mk_basis(k + j, margin):
            jet = kuga_shimura_component(k, d, j, f)
            out.append(jet)
    if not as_series:
        return out
    series = [jet.to_vector_qseries(d) for jet in out]
    series = [_truncate_vector(s, prec) for s in series]
    from .qexp import vector_rank

    if vector_rank(series) != len(series):
        raise PrecisionExhausted(
            "constructed expansions are not visibly independent; raise prec"
        )
    return series


def _truncate_vector(s: VectorQSeries, n_max: int) -> VectorQSeries:
    keep = [s.coeffs[i] for i in range(min(n_max - s.n0 + 1, len(s.coeffs)))]
    return VectorQSeries(s.typ, s.weight, keep, s.n0, s.h)


def kuga_shimura_dimension(k: int, d: int) -> int:
    return sum(dim_mk(k + j) for j in range(-d, d + 1, 2))


def dim_modular_forms(t, k: int):
    """dim M_k for a tree-built type; {dim, valid, bounds}.

    Depth-0 trees go through the Kuga-Shimura sum.  Extensions add sub and
    quotient dimensions when the obstruction space M_{2-k}(sub dual) vanishes;
    otherwise only the bracket [dim sub, dim sub + dim quotient] is reported.
    """
    tree = t.tree if isinstance(t, ArithType) else t

    def depth0_dim(tr, kk):
        kind = tr[0]
        if kind == "triv":
            return dim_mk(kk)
        if kind == "sym":
            d = tr[1]
            if d == 0:
                return dim_mk(kk)
            if not ks_hypothesis(kk, d):
                raise HypothesisViolated(
                    f"(k, d) = ({kk}, {d}) outside the normal-form range"
                )
            return kuga_shimura_dimension(kk, d)
        if kind == "sum":
            return depth0_dim(tr[1], kk) + depth0_dim(tr[2], kk)
        if kind == "dual":
            return depth0_dim(tr[1], kk)  # depth-0 vra types are self-dual
        raise UnsupportedTree(f"dimension for tree node {kind!r} is unsupported")

    kind = tree[0]
    if kind in ("triv", "sym", "sum", "dual"):
        try:
            val = depth0_dim(tree, k)
            return {"dim": val, "valid": True}
        except HypothesisViolated:
            return {"dim": None, "valid": False, "reason": "hypothesis"}
    if kind in ("ext", "uext"):
        sub_tree, quot_tree = tree[1], tree[2]
        if isinstance(t, ArithType) and hasattr(t, "ext_classes"):
            e = max(len(t.ext_classes), 0)
            if e == 0:
                e = 1 if kind == "ext" else 0
        else:
            e = 1
        sub_dim = depth0_dim(sub_tree, k)
        quot_dim = depth0_dim(quot_tree, k) * max(e, 1) if e else 0
        if kind == "uext" and isinstance(t, ArithType) and hasattr(t, "ext_classes") and not t.ext_classes:
            # degenerate universal extension: a direct sum
            return {"dim": sub_dim + depth0_dim(quot_tree, k), "valid": True}
        obstruction = depth0_dim(sub_tree, 2 - k)  # sub is self-dual depth 0
        if obstruction == 0:
            return {"dim": sub_dim + quot_dim, "valid": True}
        return {
            "dim": None,
            "valid": False,
            "bounds": [sub_dim, sub_dim + quot_dim],
            "reason": "surjectivity obstruction",
        }
    raise UnsupportedTree(f"dimension for tree node {kind!r} is unsupported")
