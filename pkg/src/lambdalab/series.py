"""Exact truncated power-series solvers for λ-term counting systems.

The engine evaluates systems of guarded functional equations (every
right-hand side gains at least one power of z before any self-reference)
lazily, coefficient by coefficient, over pluggable coefficient rings:

* plain integers — counting series;
* first/second-order jets in ε = u−1 — means and variances without
  carrying full polynomials;
* four-slot jets — simultaneous first-order data for the variable /
  redex / successor / abstraction marks;
* dense integer polynomials in u — exact finite-size distributions.

Coefficients are always exact (arbitrary-precision integers); rationals
appear only in extracted moments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union


class SeriesError(ValueError):
    pass


# Exact u-distributions carry full polynomials per coefficient; their size
# grows combinatorially, so full mode is capped (override via the cap
# argument of the solvers).
FULL_DISTRIBUTION_CAP = 30

PARAMETERS = (
    "variables",
    "redexes",
    "successors",
    "abstractions",
    "joint4",
    "head_abs",
    "lo_cost",
    "index_value_profile",
    "free_variables",
)

JOINT4_MARKS = ("variables", "redexes", "successors", "abstractions")


# ---------------------------------------------------------------------------
# coefficient rings


class IntRing:
    """Plain arbitrary-precision integers."""

    zero = 0
    one = 1

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def from_int(c):
        return c

    @staticmethod
    def u_power(k):
        return 1

    @staticmethod
    def scaled_u_power(c, k):
        return c


class Jet1Ring:
    """Pairs (a, b) representing a + b·ε modulo ε², with ε = u−1."""

    zero = (0, 0)
    one = (1, 0)

    @staticmethod
    def add(x, y):
        return (x[0] + y[0], x[1] + y[1])

    @staticmethod
    def sub(x, y):
        return (x[0] - y[0], x[1] - y[1])

    @staticmethod
    def mul(x, y):
        x0, x1 = x
        y0, y1 = y
        return (x0 * y0, x0 * y1 + x1 * y0)

    @staticmethod
    def from_int(c):
        return (c, 0)

    @staticmethod
    def u_power(k):
        # u^k = (1+ε)^k ≡ 1 + kε
        return (1, k)

    @staticmethod
    def scaled_u_power(c, k):
        return (c, c * k)


class Jet2Ring:
    """Triples (a, b, c) = a + b·ε + c·ε² modulo ε³."""

    zero = (0, 0, 0)
    one = (1, 0, 0)

    @staticmethod
    def add(x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2])

    @staticmethod
    def sub(x, y):
        return (x[0] - y[0], x[1] - y[1], x[2] - y[2])

    @staticmethod
    def mul(x, y):
        x0, x1, x2 = x
        y0, y1, y2 = y
        return (x0 * y0, x0 * y1 + x1 * y0, x0 * y2 + x1 * y1 + x2 * y0)

    @staticmethod
    def from_int(c):
        return (c, 0, 0)

    @staticmethod
    def u_power(k):
        return (1, k, k * (k - 1) // 2)

    @staticmethod
    def scaled_u_power(c, k):
        return (c, c * k, c * (k * (k - 1) // 2))


class Joint4Ring:
    """First-order jets in four marking directions at once.

    Elements are 5-tuples (a, d_var, d_red, d_suc, d_abs): the value at all
    marks = 1 plus one partial derivative per mark.
    """

    zero = (0, 0, 0, 0, 0)
    one = (1, 0, 0, 0, 0)
    SLOTS = {name: i + 1 for i, name in enumerate(JOINT4_MARKS)}

    @staticmethod
    def add(x, y):
        return tuple(a + b for a, b in zip(x, y))

    @staticmethod
    def sub(x, y):
        return tuple(a - b for a, b in zip(x, y))

    @staticmethod
    def mul(x, y):
        x0 = x[0]
        y0 = y[0]
        return (
            x0 * y0,
            x0 * y[1] + x[1] * y0,
            x0 * y[2] + x[2] * y0,
            x0 * y[3] + x[3] * y0,
            x0 * y[4] + x[4] * y0,
        )

    @staticmethod
    def from_int(c):
        return (c, 0, 0, 0, 0)

    @classmethod
    def mark_power(cls, mark, k):
        out = [1, 0, 0, 0, 0]
        out[cls.SLOTS[mark]] = k
        return tuple(out)


class PolyRing:
    """Dense integer polynomials in u, as coefficient lists."""

    zero = ()
    one = (1,)

    @staticmethod
    def add(x, y):
        if len(x) < len(y):
            x, y = y, x
        out = list(x)
        for i, c in enumerate(y):
            out[i] += c
        return tuple(out)

    @staticmethod
    def sub(x, y):
        out = list(x) + [0] * (len(y) - len(x))
        for i, c in enumerate(y):
            out[i] -= c
        return tuple(out)

    @staticmethod
    def mul(x, y):
        if not x or not y:
            return ()
        out = [0] * (len(x) + len(y) - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    out[i + j] += a * b
        return tuple(out)

    @staticmethod
    def from_int(c):
        return (c,) if c else ()

    @staticmethod
    def u_power(k):
        return (0,) * k + (1,)

    @staticmethod
    def scaled_u_power(c, k):
        return (0,) * k + (c,) if c else ()


def _ring_for(jets: Union[int, str]):
    if jets == 1:
        return Jet1Ring
    if jets == 2:
        return Jet2Ring
    if jets == "full":
        return PolyRing
    raise SeriesError(f"jet degree must be 1, 2 or 'full', got {jets!r}")


# ---------------------------------------------------------------------------
# lazy series nodes
#
# A node caches its coefficients and computes them strictly in ascending
# order, so that guarded self-reference (every cycle passes through a
# ShiftZ) needs only already-cached values.  Solvers prime nodes with an
# explicit ascending loop, keeping recursion depth bounded by the static
# size of the equation graph.


class Node:
    __slots__ = ("ring", "_c", "val")

    def __init__(self, ring, val=0):
        self.ring = ring
        self._c: list = []
        self.val = val  # static lower bound for the valuation

    def coeff(self, n):
        c = self._c
        while len(c) <= n:
            k = len(c)
            c.append(self.ring.zero if k < self.val else self._compute(k))
        return c[n]

    def _compute(self, n):  # pragma: no cover - abstract
        raise NotImplementedError


class Defer(Node):
    """Forward declaration for recursively defined series."""

    __slots__ = ("target",)

    def __init__(self, ring, val=0):
        super().__init__(ring, val)
        self.target: Optional[Node] = None

    def bind(self, target: Node):
        self.target = target
        return self

    def _compute(self, n):
        return self.target.coeff(n)


class FromFunc(Node):
    __slots__ = ("fn",)

    def __init__(self, ring, fn: Callable[[int], object], val=0):
        super().__init__(ring, val)
        self.fn = fn

    def _compute(self, n):
        return self.fn(n)


class FromList(Node):
    __slots__ = ("data",)

    def __init__(self, ring, data: Sequence):
        super().__init__(ring, 0)
        self.data = data

    def _compute(self, n):
        return self.data[n] if n < len(self.data) else self.ring.zero


class IntLift(Node):
    """View an integer coefficient list through another ring."""

    __slots__ = ("data",)

    def __init__(self, ring, data: Sequence[int], val=0):
        super().__init__(ring, val)
        self.data = data

    def _compute(self, n):
        c = self.data[n] if n < len(self.data) else 0
        return self.ring.from_int(c)


class Sum(Node):
    __slots__ = ("parts",)

    def __init__(self, *parts: Node):
        super().__init__(parts[0].ring, min(p.val for p in parts))
        self.parts = parts

    def _compute(self, n):
        add = self.ring.add
        total = self.ring.zero
        for p in self.parts:
            total = add(total, p.coeff(n))
        return total


class Sub(Node):
    __slots__ = ("a", "b")

    def __init__(self, a: Node, b: Node):
        super().__init__(a.ring, min(a.val, b.val))
        self.a = a
        self.b = b

    def _compute(self, n):
        return self.ring.sub(self.a.coeff(n), self.b.coeff(n))


class Mul(Node):
    __slots__ = ("a", "b")

    def __init__(self, a: Node, b: Node):
        super().__init__(a.ring, a.val + b.val)
        self.a = a
        self.b = b

    def _compute(self, n):
        a, b = self.a, self.b
        lo = a.val
        hi = n - b.val
        if lo > hi:
            return self.ring.zero
        a.coeff(hi)
        b.coeff(n - lo)
        ac = a._c
        bc = b._c
        mul = self.ring.mul
        add = self.ring.add
        total = mul(ac[lo], bc[n - lo])
        for k in range(lo + 1, hi + 1):
            total = add(total, mul(ac[k], bc[n - k]))
        return total


class ShiftZ(Node):
    """Multiplication by z^k."""

    __slots__ = ("a", "k")

    def __init__(self, a: Node, k: int = 1):
        super().__init__(a.ring, a.val + k)
        self.a = a
        self.k = k

    def _compute(self, n):
        return self.a.coeff(n - self.k) if n >= self.k else self.ring.zero


class Scale(Node):
    """Multiplication by a constant ring element."""

    __slots__ = ("a", "c")

    def __init__(self, c, a: Node):
        super().__init__(a.ring, a.val)
        self.a = a
        self.c = c

    def _compute(self, n):
        return self.ring.mul(self.c, self.a.coeff(n))


def _supply(ring, n_max: Optional[int], mark_exp: Optional[Callable[[int], int]] = None,
            const=None) -> Node:
    """Index-block series Σ z^n over 1 ≤ n (≤ n_max), optionally weighted.

    mark_exp(n) gives the u-exponent attached to z^n; const multiplies the
    whole block by a fixed ring element.
    """
    one = ring.one

    def fn(n):
        if n < 1 or (n_max is not None and n > n_max):
            return ring.zero
        c = one if mark_exp is None else ring.u_power(mark_exp(n))
        if const is not None:
            c = ring.mul(const, c)
        return c

    return FromFunc(ring, fn, val=1)


def _prime(nodes: Sequence[Node], n_top: int):
    for n in range(n_top + 1):
        for node in nodes:
            node.coeff(n)


# ---------------------------------------------------------------------------
# result containers


@dataclass
class Series:
    """Truncated counting series with exact integer coefficients."""

    coefficients: List[int]
    truncation_order: int

    def coeff(self, n: int) -> int:
        if n > self.truncation_order:
            raise SeriesError(f"coefficient {n} beyond truncation order {self.truncation_order}")
        return self.coefficients[n]


@dataclass
class JetSeries:
    """Marked series: per-n jets (tuples) or full u-polynomials (lists)."""

    parameter: str
    marks: Tuple[str, ...]
    jets: Union[int, str]  # 1, 2 or "full"
    coefficients: list
    truncation_order: int

    def coeff(self, n: int):
        if n > self.truncation_order:
            raise SeriesError(f"coefficient {n} beyond truncation order {self.truncation_order}")
        return self.coefficients[n]

    def totals(self) -> List[int]:
        """Coefficients with every mark erased (u := 1)."""
        if self.jets == "full":
            return [sum(c) for c in self.coefficients]
        return [c[0] for c in self.coefficients]


@dataclass
class TruncatedSystem:
    """Solved ladder: levels[m] is the m-open series, levels[depth] the closure."""

    depth: int
    parameter: Optional[str]
    levels: list
    truncation_order: int


def mean_at_n(marked: JetSeries, n: int, mark: Optional[str] = None) -> Fraction:
    """E[parameter] over size-n terms, exact."""
    c = marked.coeff(n)
    if marked.jets == "full":
        total = sum(c)
        if total == 0:
            raise SeriesError(f"no terms of size {n}")
        return Fraction(sum(k * v for k, v in enumerate(c)), total)
    if c[0] == 0:
        raise SeriesError(f"no terms of size {n}")
    if len(marked.marks) > 1:
        if mark is None:
            raise SeriesError("joint series needs an explicit mark")
        return Fraction(c[1 + marked.marks.index(mark)], c[0])
    return Fraction(c[1], c[0])


def variance_at_n(marked: JetSeries, n: int) -> Fraction:
    """Var[parameter] over size-n terms; needs jets=2 or full mode."""
    c = marked.coeff(n)
    if marked.jets == "full":
        total = sum(c)
        if total == 0:
            raise SeriesError(f"no terms of size {n}")
        mean = Fraction(sum(k * v for k, v in enumerate(c)), total)
        second = Fraction(sum(k * k * v for k, v in enumerate(c)), total)
        return second - mean * mean
    if marked.jets != 2:
        raise SeriesError("variance needs jets=2 (or full mode)")
    a, b, c2 = c
    if a == 0:
        raise SeriesError(f"no terms of size {n}")
    mean = Fraction(b, a)
    return Fraction(2 * c2, a) + mean - mean * mean


def distribution_at_n(marked: JetSeries, n: int) -> Dict[int, int]:
    """Exact value→count histogram at size n (full mode only)."""
    if marked.jets != "full":
        raise SeriesError("exact distributions need full mode")
    return {k: v for k, v in enumerate(marked.coeff(n)) if v}


# ---------------------------------------------------------------------------
# integer square root of a series (for the closed-form routes)


def _sqrt_int_series(r: List[int], n_top: int) -> List[int]:
    """√ of an integer series with constant term 1, assuming the result is
    again an integer series (true for the radicands used here)."""
    if r[0] != 1:
        raise SeriesError("series sqrt needs constant term 1")
    s = [1]
    for n in range(1, n_top + 1):
        acc = r[n] if n < len(r) else 0
        acc -= sum(s[k] * s[n - k] for k in range(1, n))
        if acc % 2:
            raise SeriesError("series sqrt is not integral; radicand is wrong")
        s.append(acc // 2)
    return s


def _plain_closed_form(n_top: int) -> List[int]:
    # radicand (1−z)² − 4z²/(1−z) = 1 − 2z − 3z² − 4z³ − 4z⁴ − ...
    r = [1, -2, -3] + [-4] * max(0, n_top - 1)
    s = _sqrt_int_series(r, n_top + 1)
    out = [0] * (n_top + 1)
    for n in range(1, n_top + 1):
        v = -s[n + 1]
        if v % 2:
            raise SeriesError("closed form gave a non-integer coefficient")
        out[n] = v // 2
    if n_top >= 0 and (1 + s[1]) != 0:
        raise SeriesError("closed form has a spurious constant term")
    return out


def _motzkin_closed_form(n_top: int) -> List[int]:
    # radicand (1+z)(1−3z) = 1 − 2z − 3z²
    r = [1, -2, -3]
    s = _sqrt_int_series(r, n_top + 1)
    out = [0] * (n_top + 1)
    for n in range(1, n_top + 1):
        v = -s[n + 1]
        if v % 2:
            raise SeriesError("closed form gave a non-integer coefficient")
        out[n] = v // 2
    return out


# ---------------------------------------------------------------------------
# basic solvers


def _solve_plain_nodes(N: int) -> List[int]:
    L = Defer(IntRing, val=1)
    L.bind(Sum(ShiftZ(L), ShiftZ(Mul(L, L)), _supply(IntRing, None)))
    _prime([L], N)
    return L._c[: N + 1]


def solve_plain(N: int) -> Series:
    """Counting series of plain terms: L = zL + zL² + z/(1−z).

    Solved twice — by the guarded fixed point and via the explicit
    square-root form — and cross-checked coefficient by coefficient.
    """
    if N < 1:
        raise SeriesError("order must be at least 1")
    coeffs = _solve_plain_nodes(N)
    if coeffs != _plain_closed_form(N):
        raise SeriesError("plain-term solver routes disagree")
    return Series(coeffs, N)


def solve_normal_forms(N: int) -> Tuple[Series, Series]:
    """(normal forms, neutral terms): N = zN + M, M = zMN + z/(1−z)."""
    if N < 1:
        raise SeriesError("order must be at least 1")
    Nn = Defer(IntRing, val=1)
    Mm = Defer(IntRing, val=1)
    Mm.bind(Sum(ShiftZ(Mul(Mm, Nn)), _supply(IntRing, None)))
    Nn.bind(Sum(ShiftZ(Nn), Mm))
    _prime([Mm, Nn], N)
    m_coeffs = Mm._c[: N + 1]
    if m_coeffs != _motzkin_closed_form(N):
        raise SeriesError("neutral-term solver routes disagree")
    return Series(Nn._c[: N + 1], N), Series(m_coeffs, N)


# ---------------------------------------------------------------------------
# marked plain-term systems


def _check_full_cap(N: int, jets, cap: Optional[int]):
    limit = FULL_DISTRIBUTION_CAP if cap is None else cap
    if jets == "full" and limit is not None and N > limit:
        raise SeriesError(
            f"exact distribution order {N} exceeds the cap {limit}; "
            "raise the cap explicitly for larger orders"
        )


def _marked_plain_graph(parameter: str, ring, plain: List[int],
                        neutral: List[int]) -> Node:
    """Equation graph for a single-mark plain-term parameter."""
    u = ring.u_power(1)
    if parameter == "variables":
        L = Defer(ring, val=1)
        L.bind(Sum(ShiftZ(L), ShiftZ(Mul(L, L)),
                   _supply(ring, None, mark_exp=lambda n: 1)))
        return L
    if parameter == "successors":
        L = Defer(ring, val=1)
        L.bind(Sum(ShiftZ(L), ShiftZ(Mul(L, L)),
                   _supply(ring, None, mark_exp=lambda n: n - 1)))
        return L
    if parameter == "abstractions":
        L = Defer(ring, val=1)
        L.bind(Sum(Scale(u, ShiftZ(L)), ShiftZ(Mul(L, L)),
                   _supply(ring, None)))
        return L
    if parameter == "redexes":
        # A: index-or-application terms; the redex case carries the mark.
        L = Defer(ring, val=1)
        A = Defer(ring, val=1)
        A.bind(Sum(_supply(ring, None),
                   Scale(u, ShiftZ(Mul(L, L), 2)),
                   ShiftZ(Mul(A, L))))
        L.bind(Sum(ShiftZ(L), A))
        return L
    if parameter == "free_variables":
        raise SeriesError("free_variables uses the depth ladder")  # handled by caller
    if parameter == "lo_cost":
        return _lo_cost_graph(ring, plain, neutral)
    raise SeriesError(f"unknown parameter {parameter!r}")


def _lo_cost_graph(ring, plain: List[int], neutral: List[int]) -> Node:
    """Traversal-cost marking for the leftmost-outermost redex search.

    Auxiliary classes: A — indices and application-rooted terms, cost-marked;
    G_M / G_N — neutral terms / normal forms with their own standalone
    traversal cost.  A neutral term appearing as the left branch of an
    application is scanned completely, so there its full atom count is
    marked (the M(zu) factor); the subtraction forming the non-normal
    left-branch class must therefore remove neutral terms with their
    standalone-cost marking, which is what G_M provides.
    """
    u = ring.u_power(1)
    uu = ring.u_power(2)
    Mzu = FromFunc(ring, lambda n: ring.scaled_u_power(
        neutral[n] if n < len(neutral) else 0, n), val=1)
    L1 = IntLift(ring, plain, val=1)
    L = Defer(ring, val=1)
    A = Defer(ring, val=1)
    GN = Defer(ring, val=1)
    GM = Defer(ring, val=1)
    GM.bind(Sum(_supply(ring, None, mark_exp=lambda n: 1),
                Scale(u, ShiftZ(Mul(Mzu, GN)))))
    GN.bind(Sum(Scale(u, ShiftZ(GN)), GM))
    A.bind(Sum(_supply(ring, None, mark_exp=lambda n: 1),
               Scale(uu, ShiftZ(Mul(L1, L1), 2)),
               Scale(u, ShiftZ(Mul(Mzu, L))),
               Scale(u, ShiftZ(Mul(Sub(A, GM), L1)))))
    L.bind(Sum(Scale(u, ShiftZ(L)), A))
    return L


def _head_abs_block(plain: List[int], N: int) -> List[int]:
    """B = z/(1−z) + zL², the series of terms not starting with λ."""
    L = FromList(IntRing, plain)
    B = Sum(_supply(IntRing, None), ShiftZ(Mul(L, L)))
    _prime([B], N)
    return B._c[: N + 1]


def _head_abs_series(ring, block_at_level, N: int) -> list:
    """Coefficients of the head-abstraction marked series from per-level
    blocks: the count of terms with k leading λ's and size n is
    [z^{n−k}] block_k."""
    coeffs = []
    for n in range(N + 1):
        acc = ring.zero
        for k in range(n):
            c = block_at_level(k)[n - k] if n - k < len(block_at_level(k)) else 0
            if c:
                acc = ring.add(acc, ring.scaled_u_power(c, k))
        coeffs.append(acc)
    return coeffs


def _occurrence_base(plain: List[int], N: int) -> List[int]:
    """G = 1/(1 − z − 2zL): index occurrences of value v at size n total
    [z^{n−v−1}]G across all plain terms."""
    L = FromList(IntRing, plain)
    G = Defer(IntRing)
    G.bind(Sum(FromFunc(IntRing, lambda n: 1 if n == 0 else 0),
               ShiftZ(G), ShiftZ(Scale(2, Mul(L, G)))))
    _prime([G], N)
    return G._c[: N + 1]


def _index_profile_series(ring, base: List[int], N: int) -> list:
    coeffs = []
    for n in range(N + 1):
        acc = ring.zero
        for v in range(n):
            c = base[n - v - 1]
            if c:
                acc = ring.add(acc, ring.scaled_u_power(c, v))
        coeffs.append(acc)
    return coeffs


def _free_variables_plain(ring, plain: List[int], N: int) -> Node:
    """Depth-stratified ladder: at ambient depth m an index j ≥ m is a free
    occurrence (marked), j < m is bound.  Exact to order N with depth N."""
    M = N
    levels = [Defer(ring, val=1) for _ in range(M + 1)]
    limit = IntLift(ring, plain, val=1)
    levels[M].bind(limit)
    for m in range(M - 1, -1, -1):
        lvl = levels[m]

        def mark(n, m=m):
            return 0 if n <= m else 1

        lvl.bind(Sum(ShiftZ(levels[m + 1]), ShiftZ(Mul(lvl, lvl)),
                     _supply(ring, None, mark_exp=mark)))
    return levels[0]


def solve_marked_plain(parameter: str, N: int, jets: Union[int, str] = "full",
                       cap: Optional[int] = None) -> JetSeries:
    """Marked plain-term series for one parameter (or the four-mark joint).

    jets=1 carries means, jets=2 also variances, "full" the exact
    u-distribution per coefficient.
    """
    if parameter not in PARAMETERS:
        raise SeriesError(f"unknown parameter {parameter!r}")
    if N < 1:
        raise SeriesError("order must be at least 1")
    _check_full_cap(N, jets, cap)

    plain = _solve_plain_nodes(N)

    if parameter == "joint4":
        if jets != 1:
            raise SeriesError("joint4 is only available at jet degree 1")
        ring = Joint4Ring
        u_var = ring.mark_power("variables", 1)
        u_red = ring.mark_power("redexes", 1)
        u_abs = ring.mark_power("abstractions", 1)
        ured_uabs = ring.mul(u_red, u_abs)
        L = Defer(ring, val=1)
        A = Defer(ring, val=1)

        def idx_supply(n):
            if n < 1:
                return ring.zero
            # u_var · (u_suc z)^{n−1} · z
            out = [1, 0, 0, 0, 0]
            out[ring.SLOTS["variables"]] = 1
            out[ring.SLOTS["successors"]] = n - 1
            return tuple(out)

        A.bind(Sum(FromFunc(ring, idx_supply, val=1),
                   Scale(ured_uabs, ShiftZ(Mul(L, L), 2)),
                   ShiftZ(Mul(A, L))))
        L.bind(Sum(Scale(u_abs, ShiftZ(L)), A))
        _prime([A, L], N)
        return JetSeries("joint4", JOINT4_MARKS, 1, L._c[: N + 1], N)

    ring = _ring_for(jets)
    if parameter == "head_abs":
        block = _head_abs_block(plain, N)
        coeffs = _head_abs_series(ring, lambda k: block, N)
        return JetSeries(parameter, (parameter,), jets, coeffs, N)
    if parameter == "index_value_profile":
        base = _occurrence_base(plain, N)
        coeffs = _index_profile_series(ring, base, N)
        return JetSeries(parameter, (parameter,), jets, coeffs, N)
    if parameter == "free_variables":
        root = _free_variables_plain(ring, plain, N)
        _prime([root], N)
        return JetSeries(parameter, (parameter,), jets, root._c[: N + 1], N)

    neutral: List[int] = []
    if parameter == "lo_cost":
        neutral = solve_normal_forms(N)[1].coefficients
    root = _marked_plain_graph(parameter, ring, plain, neutral)
    _prime([root], N)
    return JetSeries(parameter, (parameter,), jets, root._c[: N + 1], N)


def solve_redex_search_formula(N: int, jets: Union[int, str] = 1,
                               cap: Optional[int] = None) -> JetSeries:
    """Variant redex-search series in which the non-normal left-branch class
    is formed by subtracting neutral terms with *all* atoms marked.

    This is not the distribution of the operational traversal cost (its
    coefficients differ from the brute-force histogram from size 4 on), but
    its limit mean is the classical constant 6.222262521, and it is the
    series behind that constant.  Kept separate from the "lo_cost"
    parameter, which matches the oracle exactly.
    """
    if N < 1:
        raise SeriesError("order must be at least 1")
    _check_full_cap(N, jets, cap)
    ring = _ring_for(jets)
    plain = _solve_plain_nodes(N)
    _, M_series = solve_normal_forms(N)
    neutral = M_series.coefficients
    u = ring.u_power(1)
    uu = ring.u_power(2)
    Mzu = FromFunc(ring, lambda n: ring.scaled_u_power(
        neutral[n] if n < len(neutral) else 0, n), val=1)
    L1 = IntLift(ring, plain, val=1)
    L = Defer(ring, val=1)
    A = Defer(ring, val=1)
    A.bind(Sum(_supply(ring, None, mark_exp=lambda n: 1),
               Scale(uu, ShiftZ(Mul(L1, L1), 2)),
               Scale(u, ShiftZ(Mul(Mzu, L))),
               Scale(u, ShiftZ(Mul(Sub(A, Mzu), L1)))))
    L.bind(Sum(Scale(u, ShiftZ(L)), A))
    _prime([A, L], N)
    return JetSeries("redex_search_formula", ("lo_cost",), jets, L._c[: N + 1], N)


# ---------------------------------------------------------------------------
# openness-stratified (truncated) systems
#
# Level m admits indices 0 .. m−1 at the root; the body of an abstraction
# lives one level up.  The ladder is cut at a finite depth and closed with
# the limit (unrestricted) system, which leaves coefficients up to the
# truncation order exact as long as the depth is at least the order.


def _level_series_exactness(depth: int, N: int):
    if depth < N:
        raise SeriesError(
            f"ladder depth {depth} is below the truncation order {N}; "
            "coefficients would not all be exact"
        )


def solve_closed_ladder(N: int, depth: Optional[int] = None) -> TruncatedSystem:
    """Counting ladder L_m = zL_{m+1} + zL_m² + z(1−z^m)/(1−z), closed at
    `depth` with the plain series.  levels[0] counts closed terms."""
    if N < 1:
        raise SeriesError("order must be at least 1")
    M = N if depth is None else depth
    _level_series_exactness(M, N)
    plain = _solve_plain_nodes(N)
    levels: List[Node] = [Defer(IntRing, val=1) for _ in range(M + 1)]
    levels[M] = FromList(IntRing, plain)
    for m in range(M - 1, -1, -1):
        lvl = levels[m]
        lvl.bind(Sum(ShiftZ(levels[m + 1]), ShiftZ(Mul(lvl, lvl)),
                     _supply(IntRing, m)))
    _prime(levels, N)
    return TruncatedSystem(M, None, [lv._c[: N + 1] if isinstance(lv, Defer) else plain[: N + 1]
                                     for lv in levels], N)


def level_series(system: TruncatedSystem, m: int) -> Series:
    if not 0 <= m <= system.depth:
        raise SeriesError(f"level {m} outside ladder depth {system.depth}")
    return Series(list(system.levels[m]), system.truncation_order)


def solve_h_shallow(N: int, h: int) -> TruncatedSystem:
    """Closed terms whose index values never exceed h.

    Levels saturate at m = h+1 (deeper levels obey the identical equation),
    so the saturated level is solved self-referentially and the rest of the
    ladder descends from it.  No closure approximation: all coefficients
    are exact.
    """
    if N < 1:
        raise SeriesError("order must be at least 1")
    if h < 0:
        raise SeriesError("shallowness bound must be non-negative")
    M = h + 1
    levels = [Defer(IntRing, val=1) for _ in range(M + 1)]
    sat = levels[M]
    sat.bind(Sum(ShiftZ(sat), ShiftZ(Mul(sat, sat)), _supply(IntRing, M)))
    for m in range(M - 1, -1, -1):
        lvl = levels[m]
        lvl.bind(Sum(ShiftZ(levels[m + 1]), ShiftZ(Mul(lvl, lvl)),
                     _supply(IntRing, m)))
    _prime(levels, N)
    return TruncatedSystem(M, None, [lv._c[: N + 1] for lv in levels], N)


def _joint4_supply(ring, n_max: Optional[int]) -> Node:
    def fn(n):
        if n < 1 or (n_max is not None and n > n_max):
            return ring.zero
        out = [1, 0, 0, 0, 0]
        out[ring.SLOTS["variables"]] = 1
        out[ring.SLOTS["successors"]] = n - 1
        return tuple(out)

    return FromFunc(ring, fn, val=1)


def _neutral_ladders(N: int, M: int, m_base: int) -> Tuple[List[List[int]], List[List[int]]]:
    """Unmarked normal-form / neutral ladders, closed with their limit system."""
    Ml = [Defer(IntRing, val=1) for _ in range(M + 1)]
    Nl = [Defer(IntRing, val=1) for _ in range(M + 1)]
    Ml[M].bind(Sum(ShiftZ(Mul(Ml[M], Nl[M])), _supply(IntRing, None)))
    Nl[M].bind(Sum(ShiftZ(Nl[M]), Ml[M]))
    for d in range(M - 1, -1, -1):
        Ml[d].bind(Sum(ShiftZ(Mul(Ml[d], Nl[d])), _supply(IntRing, m_base + d)))
        Nl[d].bind(Sum(ShiftZ(Nl[d + 1]), Ml[d]))
    _prime(Ml + Nl, N)
    return [lv._c[: N + 1] for lv in Ml], [lv._c[: N + 1] for lv in Nl]


def _atom_marked(ring, data: List[int]) -> Node:
    """Lift an integer series c_n z^n to c_n (zu)^n — every atom marked."""

    def fn(n):
        return ring.scaled_u_power(data[n] if n < len(data) else 0, n)

    return FromFunc(ring, fn, val=1)


def _lo_cost_closed_root(ring, N: int, M: int, m_base: int, plain: List[int],
                         levels: List[List[int]]) -> Tuple[Node, List[Node]]:
    neutral_levels, _ = _neutral_ladders(N, M, m_base)
    u = ring.u_power(1)
    uu = ring.u_power(2)
    Mzu = [_atom_marked(ring, neutral_levels[d]) for d in range(M + 1)]
    Lint = [IntLift(ring, levels[d], val=1) for d in range(M + 1)]
    Lpl = IntLift(ring, plain, val=1)
    GM = [Defer(ring, val=1) for _ in range(M + 1)]
    GN = [Defer(ring, val=1) for _ in range(M + 1)]
    Am = [Defer(ring, val=1) for _ in range(M + 1)]
    Lm = [Defer(ring, val=1) for _ in range(M + 1)]
    one_mark = lambda n: 1  # noqa: E731 - cost of reaching an index is 1
    GM[M].bind(Sum(_supply(ring, None, mark_exp=one_mark),
                   Scale(u, ShiftZ(Mul(Mzu[M], GN[M])))))
    GN[M].bind(Sum(Scale(u, ShiftZ(GN[M])), GM[M]))
    Am[M].bind(Sum(_supply(ring, None, mark_exp=one_mark),
                   Scale(uu, ShiftZ(Mul(Lpl, Lpl), 2)),
                   Scale(u, ShiftZ(Mul(Mzu[M], Lm[M]))),
                   Scale(u, ShiftZ(Mul(Sub(Am[M], GM[M]), Lpl)))))
    Lm[M].bind(Sum(Scale(u, ShiftZ(Lm[M])), Am[M]))
    for d in range(M - 1, -1, -1):
        GM[d].bind(Sum(_supply(ring, m_base + d, mark_exp=one_mark),
                       Scale(u, ShiftZ(Mul(Mzu[d], GN[d])))))
        GN[d].bind(Sum(Scale(u, ShiftZ(GN[d + 1])), GM[d]))
        Am[d].bind(Sum(_supply(ring, m_base + d, mark_exp=one_mark),
                       Scale(uu, ShiftZ(Mul(Lint[d + 1], Lint[d]), 2)),
                       Scale(u, ShiftZ(Mul(Mzu[d], Lm[d]))),
                       Scale(u, ShiftZ(Mul(Sub(Am[d], GM[d]), Lint[d])))))
        Lm[d].bind(Sum(Scale(u, ShiftZ(Lm[d + 1])), Am[d]))
    return Lm[0], GM + GN + Am + Lm


def _closed_head_abs(ring, N: int, m_base: int, system: TruncatedSystem) -> list:
    blocks: List[List[int]] = []
    for k in range(N):
        Lk = FromList(IntRing, system.levels[min(k, system.depth)])
        Bk = Sum(_supply(IntRing, m_base + k), ShiftZ(Mul(Lk, Lk)))
        _prime([Bk], N)
        blocks.append(Bk._c[: N + 1])
    return _head_abs_series(ring, lambda k: blocks[k], N)


def solve_marked_closed(parameter: str, N: int, jets: Union[int, str] = "full",
                        m: int = 0, depth: Optional[int] = None,
                        cap: Optional[int] = None) -> JetSeries:
    """Marked series of m-open terms (m=0: closed) for one parameter.

    Ladders are cut at `depth` (default: the order N) and closed with the
    marked limit system, keeping all reported coefficients exact.
    """
    if parameter not in PARAMETERS:
        raise SeriesError(f"unknown parameter {parameter!r}")
    if N < 1:
        raise SeriesError("order must be at least 1")
    if m < 0:
        raise SeriesError("openness bound must be non-negative")
    _check_full_cap(N, jets, cap)
    M = N if depth is None else depth
    _level_series_exactness(M, N)
    plain = _solve_plain_nodes(N)

    if parameter == "joint4":
        if jets != 1:
            raise SeriesError("joint4 is only available at jet degree 1")
        ring = Joint4Ring
        ured_uabs = ring.mul(ring.mark_power("redexes", 1),
                             ring.mark_power("abstractions", 1))
        u_abs = ring.mark_power("abstractions", 1)
        Lv = [Defer(ring, val=1) for _ in range(M + 1)]
        Av = [Defer(ring, val=1) for _ in range(M + 1)]
        Av[M].bind(Sum(_joint4_supply(ring, None),
                       Scale(ured_uabs, ShiftZ(Mul(Lv[M], Lv[M]), 2)),
                       ShiftZ(Mul(Av[M], Lv[M]))))
        Lv[M].bind(Sum(Scale(u_abs, ShiftZ(Lv[M])), Av[M]))
        for d in range(M - 1, -1, -1):
            Av[d].bind(Sum(_joint4_supply(ring, m + d),
                           Scale(ured_uabs, ShiftZ(Mul(Lv[d + 1], Lv[d]), 2)),
                           ShiftZ(Mul(Av[d], Lv[d]))))
            Lv[d].bind(Sum(Scale(u_abs, ShiftZ(Lv[d + 1])), Av[d]))
        _prime(Av + Lv, N)
        return JetSeries("joint4", JOINT4_MARKS, 1, Lv[0]._c[: N + 1], N)

    ring = _ring_for(jets)
    u = ring.u_power(1)

    if parameter == "head_abs":
        system = solve_closed_ladder(N, depth=M) if m == 0 else _m_open_system(N, M, m)
        coeffs = _closed_head_abs(ring, N, m, system)
        return JetSeries(parameter, (parameter,), jets, coeffs, N)

    if parameter == "lo_cost":
        system = _m_open_system(N, M, m)
        root, nodes = _lo_cost_closed_root(ring, N, M, m, plain, system.levels)
        _prime(nodes, N)
        return JetSeries(parameter, (parameter,), jets, root._c[: N + 1], N)

    if parameter == "index_value_profile":
        system = _m_open_system(N, M, m)
        Lint = [IntLift(ring, system.levels[d], val=1) for d in range(M + 1)]
        Lpl = IntLift(ring, plain, val=1)
        Ev = [Defer(ring, val=1) for _ in range(M + 1)]
        Ev[M].bind(Sum(_supply(ring, None, mark_exp=lambda n: n - 1),
                       ShiftZ(Ev[M]),
                       Scale(ring.from_int(2), ShiftZ(Mul(Lpl, Ev[M])))))
        for d in range(M - 1, -1, -1):
            Ev[d].bind(Sum(_supply(ring, m + d, mark_exp=lambda n: n - 1),
                           ShiftZ(Ev[d + 1]),
                           Scale(ring.from_int(2), ShiftZ(Mul(Lint[d], Ev[d])))))
        _prime(Ev, N)
        return JetSeries(parameter, (parameter,), jets, Ev[0]._c[: N + 1], N)

    levels = [Defer(ring, val=1) for _ in range(M + 1)]

    if parameter in ("variables", "successors", "abstractions"):
        if parameter == "variables":
            def supply_at(n_max):
                return _supply(ring, n_max, mark_exp=lambda n: 1)
        elif parameter == "successors":
            def supply_at(n_max):
                return _supply(ring, n_max, mark_exp=lambda n: n - 1)
        else:
            def supply_at(n_max):
                return _supply(ring, n_max)
        lam_mark = u if parameter == "abstractions" else ring.one
        top = levels[M]
        top.bind(Sum(Scale(lam_mark, ShiftZ(top)), ShiftZ(Mul(top, top)),
                     supply_at(None)))
        for d in range(M - 1, -1, -1):
            lvl = levels[d]
            lvl.bind(Sum(Scale(lam_mark, ShiftZ(levels[d + 1])),
                         ShiftZ(Mul(lvl, lvl)), supply_at(m + d)))
        _prime(levels, N)
        return JetSeries(parameter, (parameter,), jets, levels[0]._c[: N + 1], N)

    if parameter == "redexes":
        Av = [Defer(ring, val=1) for _ in range(M + 1)]
        Av[M].bind(Sum(_supply(ring, None),
                       Scale(u, ShiftZ(Mul(levels[M], levels[M]), 2)),
                       ShiftZ(Mul(Av[M], levels[M]))))
        levels[M].bind(Sum(ShiftZ(levels[M]), Av[M]))
        for d in range(M - 1, -1, -1):
            Av[d].bind(Sum(_supply(ring, m + d),
                           Scale(u, ShiftZ(Mul(levels[d + 1], levels[d]), 2)),
                           ShiftZ(Mul(Av[d], levels[d]))))
            levels[d].bind(Sum(ShiftZ(levels[d + 1]), Av[d]))
        _prime(Av + levels, N)
        return JetSeries(parameter, (parameter,), jets, levels[0]._c[: N + 1], N)

    if parameter == "free_variables":
        # An index at abstraction depth d is free iff its value reaches
        # past the binders below it, i.e. value ≥ d; the ambient openness m
        # shifts the admissible range, not the freeness cut.
        top = levels[M]
        top.bind(IntLift(ring, plain, val=1))
        for d in range(M - 1, -1, -1):
            lvl = levels[d]

            def mark(n, d=d):
                return 1 if n - 1 >= d else 0

            lvl.bind(Sum(ShiftZ(levels[d + 1]), ShiftZ(Mul(lvl, lvl)),
                         _supply(ring, m + d, mark_exp=mark)))
        _prime(levels, N)
        return JetSeries(parameter, (parameter,), jets, levels[0]._c[: N + 1], N)

    raise SeriesError(f"unknown parameter {parameter!r}")


def _m_open_system(N: int, M: int, m: int) -> TruncatedSystem:
    """Unmarked ladder whose level d admits indices below m+d."""
    plain = _solve_plain_nodes(N)
    levels: List[Node] = [Defer(IntRing, val=1) for _ in range(M + 1)]
    levels[M] = FromList(IntRing, plain)
    for d in range(M - 1, -1, -1):
        lvl = levels[d]
        lvl.bind(Sum(ShiftZ(levels[d + 1]), ShiftZ(Mul(lvl, lvl)),
                     _supply(IntRing, m + d)))
    _prime(levels, N)
    out = []
    for lv in levels:
        out.append(lv._c[: N + 1] if isinstance(lv, Defer) else plain[: N + 1])
    return TruncatedSystem(M, None, out, N)


# ---------------------------------------------------------------------------
# height profiles
#
# profile_series(kind, height, k, N) counts pairs (term, occurrence of a
# node of the given kind whose height is k).  Unary height counts only
# abstractions on the root path; natural height counts every node above.


PROFILE_KINDS = ("variable", "abstraction", "application")


def profile_series(kind: str, height: str, k: int, N: int,
                   closed: bool = True) -> Series:
    if kind not in PROFILE_KINDS:
        raise SeriesError(f"unknown node kind {kind!r}")
    if height not in ("unary", "natural"):
        raise SeriesError("height must be 'unary' or 'natural'")
    if k < 0:
        raise SeriesError("height must be non-negative")
    if N < 1:
        raise SeriesError("order must be at least 1")
    plain = _solve_plain_nodes(N)
    if closed:
        system = solve_closed_ladder(N, depth=max(N, k + 2))

        def level(d):
            return FromList(IntRing, system.levels[min(d, system.depth)])

        def supply_at(d):
            return _supply(IntRing, d)
    else:
        def level(d):
            return FromList(IntRing, plain)

        def supply_at(d):
            return _supply(IntRing, None)

    def block(d):
        if kind == "variable":
            return supply_at(d)
        if kind == "abstraction":
            return ShiftZ(level(d + 1))
        return ShiftZ(Mul(level(d), level(d)))

    nodes: List[Node] = []
    if height == "unary":
        prev: Optional[Node] = None
        for j in range(k + 1):
            d = k - j
            rhs = block(d) if j == 0 else ShiftZ(prev)
            V = Defer(IntRing, val=1)
            V.bind(Sum(rhs, Scale(2, ShiftZ(Mul(level(d), V)))))
            nodes.append(V)
            prev = V
        root = prev
    else:
        prev_row: Dict[int, Node] = {}
        for j in range(k + 1):
            row: Dict[int, Node] = {}
            for d in range(k - j + 1):
                if j == 0:
                    row[d] = block(d)
                else:
                    row[d] = Sum(ShiftZ(prev_row[d + 1]),
                                 Scale(2, ShiftZ(Mul(level(d), prev_row[d]))))
                nodes.append(row[d])
            prev_row = row
        root = prev_row[0]
    _prime(nodes, N)
    return Series([root.coeff(n) for n in range(N + 1)], N)
