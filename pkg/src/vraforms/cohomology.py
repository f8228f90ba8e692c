"""Group cohomology of SL2(Z) arithmetic types: Z^1, B^1, H^1, parabolic
subspaces, extension classes, universal extensions, higher-order types.

Cocycles are determined by their values on the generators.  The convention
throughout is the one induced by phi_f(gamma) = f|(gamma - 1):

    phi(g1 g2) = sigma(g2)^{-1} phi(g1) + phi(g2),      phi(1) = 0,

with sigma the host type.  Coboundaries are phi_v(gamma) = sigma(gamma)^{-1} v - v.
The linear conditions cutting out Z^1 come from the presentation
S^4 = 1, (ST)^3 = S^2, S^2 T = T S^2; they are derived mechanically from the
extension rule above and pinned down by the classical weight-12 period data
(see DELTA_PERIOD_EVEN below), which must lie in Z^1 exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from . import exact
from .errors import (
    BasisMismatch,
    DimensionMismatch,
    SubgroupUnsupported,
)
from .exact import (
    ONE,
    ZERO,
    mat_identity,
    mat_inv,
    mat_kernel,
    mat_mul,
    mat_rank,
    mat_rref,
    mat_solve,
    mat_vec,
    mat_zero,
    NO_SOLUTION,
    rat_str,
)
from .modgroup import GroupElement, Subgroup, coset_table, word_decompose
from .types import (
    SL2Z,
    ArithType,
    direct_sum,
    dual_type,
    induced,
    sym_power,
    tensor_type,
    trivial,
)


class Cocycle:
    """A 1-cocycle on an SL2(Z) arithmetic type, stored by its generator values."""

    def __init__(self, host: ArithType, val_s, val_t):
        if len(val_s) != host.dim or len(val_t) != host.dim:
            raise DimensionMismatch("cocycle values must live in the host space")
        self.host = host
        self.val_s = list(val_s)
        self.val_t = list(val_t)

    def value(self, g: GroupElement):
        """phi(g), assembled along the canonical S,T word."""
        host = self.host
        word = word_decompose(g)
        val = _t_power_value(host, word.m, self.val_t)
        for e in word.exponents:
            # phi(w S T^e) = sigma(T^e)^{-1}[sigma(S)^{-1} phi(w) + phi(S)] + phi(T^e)
            val = mat_vec(_gen_inv(host, "S"), val)
            val = [x + y for x, y in zip(val, self.val_s)]
            val = mat_vec(host._mat_t_power(-e), val)
            tv = _t_power_value(host, e, self.val_t)
            val = [x + y for x, y in zip(val, tv)]
        if word.sign == -1:
            # trailing S^2
            for _ in range(2):
                val = mat_vec(_gen_inv(host, "S"), val)
                val = [x + y for x, y in zip(val, self.val_s)]
        return val

    def vector(self):
        return self.val_s + self.val_t

    def is_parabolic(self):
        return _parabolic_shift(self.host, self.val_t) is not NO_SOLUTION

    def to_json(self):
        return {
            "valS": [rat_str(x) for x in self.val_s],
            "valT": [rat_str(x) for x in self.val_t],
        }

    def __repr__(self):
        return f"Cocycle(dim={self.host.dim})"


def _gen_inv(host, name):
    cache = getattr(host, "_cocycle_cache", None)
    if cache is None:
        cache = host._cocycle_cache = {}
    key = ("inv", name)
    if key not in cache:
        m = host.matS if name == "S" else host.matT
        cache[key] = mat_inv(m)
    return cache[key]


def _t_power_value(host, e, w):
    """phi(T^e) for phi(T) = w: sum_{j<e} sigma(T)^{-j} w, any integer e."""
    if e == 0 or all(x == 0 for x in w):
        return [ZERO] * host.dim
    if e < 0:
        # 0 = phi(T^e T^{-e}) = sigma(T^{-e})^{-1} phi(T^e) + phi(T^{-e})
        pos = _t_power_value(host, -e, w)
        return [-x for x in mat_vec(host._mat_t_power(-e), pos)]
    g = _geometric_sum(host, e)
    return mat_vec(g, w)


def _geometric_sum(host, e):
    """sum_{j=0}^{e-1} sigma(T)^{-j}, by divide and conquer (O(log e) products)."""
    cache = getattr(host, "_cocycle_cache", None)
    if cache is None:
        cache = host._cocycle_cache = {}
    key = ("geo", e)
    if key in cache:
        return cache[key]
    if e == 1:
        out = mat_identity(host.dim)
    else:
        half = e // 2
        g_half = _geometric_sum(host, half)
        out = exact.mat_add(g_half, mat_mul(host._mat_t_power(-half), g_half))
        if e % 2:
            out = exact.mat_add(out, host._mat_t_power(-(e - 1)))
    cache[key] = out
    return out


def _letter_matrices(host, letters):
    """Symbolic phi(word) = A valS + B valT for a word in letters.

    letters: sequence of ("S", 1) / ("S", -1) / ("T", e).
    """
    n = host.dim
    a = mat_zero(n, n)
    b = mat_zero(n, n)
    ident = mat_identity(n)
    for name, e in letters:
        if name == "S":
            g_inv = _gen_inv(host, "S")
            if e == 1:
                a = exact.mat_add(mat_mul(g_inv, a), ident)
                b = mat_mul(g_inv, b)
            else:
                # phi(S^{-1}) = -sigma(S) phi(S)
                a = exact.mat_add(mat_mul(host.matS, a), exact.mat_neg(host.matS))
                b = mat_mul(host.matS, b)
        else:
            t_inv_e = host._mat_t_power(-e)
            a = mat_mul(t_inv_e, a)
            b = mat_mul(t_inv_e, b)
            if e >= 0:
                geo = _geometric_sum(host, e) if e else mat_zero(n, n)
                b = exact.mat_add(b, geo)
            else:
                geo = _geometric_sum(host, -e)
                b = exact.mat_add(b, exact.mat_neg(mat_mul(host._mat_t_power(-e), geo)))
    return a, b


def relation_condition_matrix(host: ArithType):
    """Stacked linear conditions on (valS, valT) cutting out Z^1."""
    n = host.dim
    conds = []
    a1, b1 = _letter_matrices(host, [("S", 1)] * 4)
    conds.append((a1, b1))
    a2, b2 = _letter_matrices(host, [("S", 1), ("T", 1)] * 3)
    a3, b3 = _letter_matrices(host, [("S", 1), ("S", 1)])
    conds.append((exact.mat_add(a2, exact.mat_neg(a3)), exact.mat_add(b2, exact.mat_neg(b3))))
    a4, b4 = _letter_matrices(host, [("S", 1), ("S", 1), ("T", 1)])
    a5, b5 = _letter_matrices(host, [("T", 1), ("S", 1), ("S", 1)])
    conds.append((exact.mat_add(a4, exact.mat_neg(a5)), exact.mat_add(b4, exact.mat_neg(b5))))
    rows = []
    for a, b in conds:
        for i in range(n):
            rows.append(a[i] + b[i])
    return rows


def _parabolic_shift(host, val_t):
    """v with sigma(T)^{-1} v - v = val_t, or NO_SOLUTION."""
    n = host.dim
    t_inv = _gen_inv(host, "T")
    m = exact.mat_add(t_inv, exact.mat_neg(mat_identity(n)))
    return mat_solve(m, val_t)


class CohomologyBasis:
    """Z^1, B^1 and canonical H^1 representatives of a host type.

    Representatives are ordered parabolic first; parabolic representatives are
    normalized to valT = 0, the rest have valS reduced against B^1.
    """

    def __init__(self, host, z1_basis, b1_basis, h1_reps, parabolic_flags):
        self.host = host
        self.z1_basis = z1_basis
        self.b1_basis = b1_basis
        self.h1_reps = h1_reps
        self.parabolic_flags = parabolic_flags

    @property
    def dim_z1(self):
        return len(self.z1_basis)

    @property
    def dim_b1(self):
        return len(self.b1_basis)

    @property
    def dim_h1(self):
        return len(self.h1_reps)

    @property
    def dim_h1_parabolic(self):
        return sum(1 for f in self.parabolic_flags if f)

    def parabolic_reps(self):
        return [c for c, f in zip(self.h1_reps, self.parabolic_flags) if f]

    def contains_cocycle(self, val_s, val_t) -> bool:
        """Exact membership of (valS, valT) in Z^1."""
        rows = relation_condition_matrix(self.host)
        vec = list(val_s) + list(val_t)
        return all(sum(r[j] * vec[j] for j in range(len(vec))) == 0 for r in rows)

    def independent_mod_b1(self, cocycles) -> bool:
        base = [c.vector() for c in self.b1_basis]
        extra = [list(c.val_s) + list(c.val_t) for c in cocycles]
        return mat_rank(base + extra) == len(base) + len(extra)

    def to_json(self):
        return {
            "dimZ1": self.dim_z1,
            "dimB1": self.dim_b1,
            "dimH1": self.dim_h1,
            "dimH1par": self.dim_h1_parabolic,
            "representatives": [
                dict(c.to_json(), parabolic=bool(f))
                for c, f in zip(self.h1_reps, self.parabolic_flags)
            ],
        }


def _reduce_against(rref_rows, piv_cols, vec):
    out = list(vec)
    for row, c in zip(rref_rows, piv_cols):
        f = out[c]
        if f:
            out = [x - f * y for x, y in zip(out, row)]
    return out


def cocycle_space(host: ArithType) -> CohomologyBasis:
    """Z^1 / B^1 / H^1 with canonical, deterministic representatives."""
    if not host.is_sl2z():
        raise SubgroupUnsupported(
            "cocycle spaces are computed over SL2(Z); induce the type first"
        )
    n = host.dim
    rows = relation_condition_matrix(host)
    z1_vecs = mat_kernel(rows)

    s_inv = _gen_inv(host, "S")
    t_inv = _gen_inv(host, "T")
    b1_raw = []
    for i in range(n):
        v = [ONE if j == i else ZERO for j in range(n)]
        b1_raw.append(
            [x - y for x, y in zip(mat_vec(s_inv, v), v)]
            + [x - y for x, y in zip(mat_vec(t_inv, v), v)]
        )
    b1_rref, b1_pivs = mat_rref(b1_raw) if b1_raw else ([], [])
    b1_vecs = b1_rref

    # split Z^1 into parabolic part (valT a T-coboundary) and the rest
    parabolic_z, other_z = [], []
    for z in z1_vecs:
        val_t = z[n:]
        shift = _parabolic_shift(host, val_t)
        if shift is NO_SOLUTION:
            other_z.append(z)
        else:
            adj = [
                a - b
                for a, b in zip(
                    z,
                    [x - y for x, y in zip(mat_vec(s_inv, shift), shift)]
                    + [x - y for x, y in zip(mat_vec(t_inv, shift), shift)],
                )
            ]
            assert all(x == 0 for x in adj[n:])
            parabolic_z.append(adj)

    # canonical representatives: greedily extend B^1 by parabolic classes,
    # then by the remaining ones (valS reduced against B^1)
    reps, flags = [], []
    span = [row[:] for row in b1_vecs]
    for z in parabolic_z:
        if mat_rank(span + [z]) > len(span):
            span.append(z)
            reps.append(z)
            flags.append(True)
    for z in other_z:
        if mat_rank(span + [z]) > len(span):
            span.append(z)
            reps.append(_reduce_against(b1_rref, b1_pivs, z))
            flags.append(False)

    def mk(vec):
        return Cocycle(host, vec[:n], vec[n:])

    return CohomologyBasis(
        host,
        [mk(v) for v in z1_vecs],
        [mk(v) for v in b1_vecs],
        [mk(v) for v in reps],
        flags,
    )


def ext_group(quot: ArithType, sub: ArithType, parabolic: bool = False):
    """Extension classes of `quot` by `sub`: H^1 of dual(quot) tensor sub.

    Returns (host type, list of representative cocycles, CohomologyBasis).
    """
    if quot.group != sub.group:
        raise SubgroupUnsupported("extension arguments live over different groups")
    host = tensor_type(dual_type(quot), sub)
    basis = cocycle_space(host)
    reps = basis.parabolic_reps() if parabolic else basis.h1_reps
    return host, reps, basis


def _hom_block(sub_dim, quot_dim, vec):
    """Reshape a dual(quot) (x) sub coordinate vector into a sub x quot matrix."""
    out = mat_zero(sub_dim, quot_dim)
    for i in range(quot_dim):
        for j in range(sub_dim):
            out[j][i] = vec[i * sub_dim + j]
    return out


def extension_by_cocycles(sub: ArithType, quot: ArithType, cocycles, parabolic, variant="universal", label=None):
    """Assemble the extension matrices realizing the given classes.

    universal:     sub   --> E --> quot^(e), corner_i(g) = sub(g) . mat(phi_i(g))
    co-universal:  sub^(e) --> E --> quot,   corners stacked vertically.
    """
    e = len(cocycles)
    ds, dq = sub.dim, quot.dim

    def corner(coc, g_name):
        g = coc.host  # dual(quot) tensor sub
        val = coc.val_s if g_name == "S" else coc.val_t
        blk = _hom_block(ds, dq, val)
        gen = sub.matS if g_name == "S" else sub.matT
        return mat_mul(gen, blk)

    def build(g_name):
        gen_sub = sub.matS if g_name == "S" else sub.matT
        gen_quot = quot.matS if g_name == "S" else quot.matT
        if variant == "universal":
            n = ds + e * dq
            out = mat_zero(n, n)
            for i in range(ds):
                for j in range(ds):
                    out[i][j] = gen_sub[i][j]
            for k, coc in enumerate(cocycles):
                blk = corner(coc, g_name)
                for i in range(ds):
                    for j in range(dq):
                        out[i][ds + k * dq + j] = blk[i][j]
                for i in range(dq):
                    for j in range(dq):
                        out[ds + k * dq + i][ds + k * dq + j] = gen_quot[i][j]
            return out
        n = e * ds + dq
        out = mat_zero(n, n)
        for k, coc in enumerate(cocycles):
            blk = corner(coc, g_name)
            for i in range(ds):
                for j in range(ds):
                    out[k * ds + i][k * ds + j] = gen_sub[i][j]
                for j in range(dq):
                    out[k * ds + i][e * ds + j] = blk[i][j]
        for i in range(dq):
            for j in range(dq):
                out[e * ds + i][e * ds + j] = gen_quot[i][j]
        return out

    tree = ("uext", sub.tree, quot.tree, parabolic, variant) if label is None else label
    t = ArithType(
        ds + e * dq if variant == "universal" else e * ds + dq,
        SL2Z,
        tree,
        build("S"),
        build("T"),
    )
    t.ext_classes = list(cocycles)
    t.ext_parts = (sub, quot, variant)
    return t


def extension_by_cocycle(sub: ArithType, quot: ArithType, cocycle: Cocycle, parabolic=None, label=None):
    """The single extension sub --> E --> quot attached to one class."""
    if parabolic is None:
        parabolic = cocycle.is_parabolic()
    tree = label or ("ext", sub.tree, quot.tree, parabolic, "custom")
    t = extension_by_cocycles(sub, quot, [cocycle], parabolic, "universal", label=tree)
    return t


def universal_extension(sub: ArithType, quot: ArithType, parabolic: bool, variant: str = "universal") -> ArithType:
    """The universal (or co-universal) extension of `sub` by `quot`.

    With no extension classes the result degenerates to the direct sum.
    """
    if variant not in ("universal", "co-universal"):
        raise BasisMismatch(f"unknown variant {variant!r}")
    _, reps, _ = ext_group(quot, sub, parabolic)
    if not reps:
        t = direct_sum(sub, quot)
        t.ext_classes = []
        t.ext_parts = (sub, quot, variant)
        return t
    return extension_by_cocycles(sub, quot, reps, parabolic, variant)


def couniversal_to_universal_matrix(co_type: ArithType, uni_type: ArithType):
    """Matrix of sum_i v_i (x) phi_i [+] v' |-> sum_i v_i [+] v' (x) phi_i.

    Both types must be built by `universal_extension` on the same parts and
    class basis; the map intertwines the two actions exactly.
    """
    if not hasattr(co_type, "ext_parts") or not hasattr(uni_type, "ext_parts"):
        raise BasisMismatch("both types must come from universal_extension")
    sub, quot, var_co = co_type.ext_parts
    sub2, quot2, var_uni = uni_type.ext_parts
    if var_co != "co-universal" or var_uni != "universal":
        raise BasisMismatch("expected a (co-universal, universal) pair")
    if (sub.dim, quot.dim) != (sub2.dim, quot2.dim) or [c.vector() for c in co_type.ext_classes] != [
        c.vector() for c in uni_type.ext_classes
    ]:
        raise BasisMismatch("the two extensions use different class bases")
    e = len(co_type.ext_classes)
    ds, dq = sub.dim, quot.dim
    rows = mat_zero(ds + e * dq, e * ds + dq)
    for k in range(e):
        for i in range(ds):
            rows[i][k * ds + i] = ONE
        for i in range(dq):
            rows[ds + k * dq + i][e * ds + i] = ONE
    return rows


# ---------------------------------------------------------------------------
# higher-order types 1^[d]


def _shapiro_compress(ind_type: ArithType, inner_dim: int, cocycle: Cocycle):
    """Restrict an SL2(Z)-cocycle on an induced type to the subgroup.

    The identity-coset block of the value at gamma' in the subgroup is a
    cocycle of the subgroup with values in the inner module.
    """

    def phi(gamma):
        val = cocycle.value(gamma)
        return val[:inner_dim]

    return phi


def subgroup_characters(subgroup: Subgroup):
    """Basis of Hom(subgroup, Q) = H^1(subgroup, 1) via Shapiro.

    Returns (evaluators, schreier generators, value matrix rows by generator).
    """
    ind = induced(subgroup, trivial(subgroup))
    basis = cocycle_space(ind)
    gens = coset_table(subgroup).schreier_generators()
    evals = []
    for rep in basis.h1_reps:
        phi = _shapiro_compress(ind, 1, rep)
        evals.append(lambda g, phi=phi: phi(g)[0])
    value_rows = [[ev(g) for ev in evals] for g in gens]
    # Shapiro is injective: the compressed characters stay independent
    if evals and mat_rank(value_rows) != len(evals):
        raise AssertionError("compressed characters lost rank")
    return evals, gens, value_rows


_HORDER_CACHE = {}


def higher_order_type(d: int, subgroup=None) -> ArithType:
    """The unipotent type 1^[d] whose modular forms carry order-d forms.

    1^[0] = 1, and 1^[d] extends 1 by h copies of 1^[d-1] where
    h = dim H^1(subgroup, 1); its dimension is sum_{j<=d} h^j.  Over SL2(Z)
    h = 0, so the result is trivial for every d.
    """
    if d < 0:
        raise DimensionMismatch("order must be >= 0")
    if subgroup is None:
        subgroup = SL2Z
    key = (d, subgroup if subgroup == SL2Z else (subgroup.kind, subgroup.level))
    if key in _HORDER_CACHE:
        return _HORDER_CACHE[key]

    if subgroup == SL2Z:
        basis = cocycle_space(trivial())
        h = basis.dim_h1  # = 0: the abelianization is finite
        out = trivial()
        out.tree = ("horder", d, "sl2z", h)
        _HORDER_CACHE[key] = out
        return out

    evals, gens, value_rows = subgroup_characters(subgroup)
    h = len(evals)
    if d == 0 or h == 0:
        out = trivial(subgroup)
        out.tree = ("horder", d, (subgroup.kind, subgroup.level), h)
        _HORDER_CACHE[key] = out
        return out

    prev = higher_order_type(d - 1, subgroup)
    dim_prev = prev.dim

    if d == 1:
        def evaluator(g, evals=evals, h=h):
            out = mat_identity(1 + h)
            for i, ev in enumerate(evals):
                out[0][1 + i] = ev(g)
            return out
    else:
        # For each character alpha_i, find a subgroup cocycle with values in
        # dual(prev) whose pairing with the invariant first coordinate is
        # alpha_i.  The pushforward H^1(sub, dual(prev)) -> Hom(sub, Q) is
        # surjective, so a rational combination of Shapiro-compressed classes
        # always exists.
        w_type = dual_type(prev)
        ind_w = induced(subgroup, w_type)
        basis_w = cocycle_space(ind_w)
        compressed = [
            _shapiro_compress(ind_w, dim_prev, rep) for rep in basis_w.h1_reps
        ]
        char_matrix = [
            [phi(g)[0] for phi in compressed] for g in gens
        ]
        combos = []
        for i in range(h):
            target = [row[i] for row in value_rows]
            sol = mat_solve(char_matrix, target)
            if sol is NO_SOLUTION:
                raise AssertionError("character lift failed; pushforward not hit")
            combos.append(sol)

        def evaluator(g, combos=combos, compressed=compressed, prev=prev, h=h, dim_prev=dim_prev):
            vals = [phi(g) for phi in compressed]
            n = 1 + h * dim_prev
            out = mat_zero(n, n)
            out[0][0] = ONE
            blk = prev.evaluate(g)
            for i in range(h):
                row = [
                    sum(c * v[j] for c, v in zip(combos[i], vals))
                    for j in range(dim_prev)
                ]
                for j in range(dim_prev):
                    out[0][1 + i * dim_prev + j] = row[j]
                for r in range(dim_prev):
                    for c in range(dim_prev):
                        out[1 + i * dim_prev + r][1 + i * dim_prev + c] = blk[r][c]
            return out

    out = ArithType(
        1 + h * dim_prev,
        subgroup,
        ("horder", d, (subgroup.kind, subgroup.level), h),
        evaluator=evaluator,
    )
    _HORDER_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# the weight-12 period data of the discriminant form

# Even and odd period polynomials of the discriminant cusp form, as degree-10
# coefficient vectors (monomial basis).  With valT = 0 they are exact cocycles
# on sym^10 and span the parabolic classes.
DELTA_PERIOD_EVEN = [
    Fraction(192, 691), Fraction(0), Fraction(-16, 3), Fraction(0), Fraction(16),
    Fraction(0), Fraction(-16), Fraction(0), Fraction(16, 3), Fraction(0),
    Fraction(-192, 691),
]
DELTA_PERIOD_ODD = [
    Fraction(0), Fraction(768), Fraction(0), Fraction(-4800), Fraction(0),
    Fraction(8064), Fraction(0), Fraction(-4800), Fraction(0), Fraction(768),
    Fraction(0),
]
# coefficients of 1 - X^10: the valT = 0 coboundary direction
PERIOD_COBOUNDARY = [Fraction(1)] + [Fraction(0)] * 9 + [Fraction(-1)]


def sym_pairing_matrix(d: int):
    """Invariant pairing on Poly(X, d) x Poly(Y, d): <X^i, Y^j> = (-1)^j / C(d, i)
    when i + j = d, else 0."""
    out = mat_zero(d + 1, d + 1)
    for i in range(d + 1):
        j = d - i
        out[i][j] = Fraction((-1) ** j, comb(d, i))
    return out


def sym_cocycle_to_dual(d: int, vec):
    """Move a sym^d-valued cocycle value to dual coordinates.

    The sign is fixed so that the resulting extension corner row, contracted
    against the coordinates of (X - tau)^d, returns the original polynomial
    evaluated at tau.
    """
    j = sym_pairing_matrix(d)
    return [-sum(vec[i] * j[i][c] for i in range(d + 1)) for c in range(d + 1)]


def delta_universal_extension() -> ArithType:
    """The 23-dimensional universal parabolic extension of 1 by sym^10,
    realized on the period-polynomial basis of the discriminant form."""
    sub = trivial()
    quot = sym_power(10)
    host = tensor_type(dual_type(quot), sub)
    cocycles = []
    for poly in (DELTA_PERIOD_EVEN, DELTA_PERIOD_ODD):
        val_s = sym_cocycle_to_dual(10, poly)
        coc = Cocycle(host, val_s, [ZERO] * host.dim)
        cocycles.append(coc)
    return extension_by_cocycles(sub, quot, cocycles, parabolic=True, variant="universal")
