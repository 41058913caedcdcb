"""Dominant singularities, Puiseux ladders, and limit-law constants.

Everything here is derived from the defining equation of the plain-term
series and its openness-stratified ladder; no constant is hardcoded beyond
the equations themselves.  The dominant singularity ρ is the positive root
of z³ + z² + 3z − 1 (the numerator of the radicand (1−z)² − 4z²/(1−z)),
and every m-open series behaves like a_m − b_m·√(1 − z/ρ) near ρ.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple


class NumericsError(ArithmeticError):
    """A calibration or cross-check failed beyond tolerance."""


GAUSSIAN_PARAMETERS = ("variables", "redexes", "successors", "abstractions")


def compute_rho() -> float:
    """Positive real root of z³ + z² + 3z − 1, to full float precision."""
    lo, hi = 0.25, 0.34

    def p(z):
        return z * z * z + z * z + 3 * z - 1

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if p(mid) <= 0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(8):
        z -= p(z) / (3 * z * z + 2 * z + 3)
    if abs(p(z)) > 1e-14:
        raise NumericsError("root refinement of the counting cubic failed")
    return z


_RHO = compute_rho()


def a_inf(rho: float = _RHO) -> float:
    """Value of the plain series at its singularity, (1−ρ)/(2ρ)."""
    return (1 - rho) / (2 * rho)


def radicand(z: float) -> float:
    return (1 - z) ** 2 - 4 * z * z / (1 - z)


def _b_inf_analytic(rho: float) -> float:
    # radicand = (1 − 3z − z² − z³)/(1 − z); its z-derivative at ρ reduces
    # to −(3 + 2ρ + 3ρ²)/(1 − ρ) because the numerator vanishes there.
    return math.sqrt(rho * (3 + 2 * rho + 3 * rho * rho) / (1 - rho)) / (2 * rho)


def _b_inf_extrapolated(rho: float) -> float:
    # Fit (a∞ − L∞(z))/√δ at z = ρ(1−δ); the error expands in powers of
    # √δ, so three Richardson steps on δ → δ/4 cancel the leading terms.
    # The radicand numerator 1 − 3z − z² − z³ is evaluated in the factored
    # form −(z−ρ)(z² + (1+ρ)z + 3 + ρ + ρ²) to avoid cancellation near ρ.
    ainf = a_inf(rho)

    def b_at(delta):
        z = rho * (1 - delta)
        num = rho * delta * (z * z + (1 + rho) * z + 3 + rho + rho * rho)
        L = (1 - z - math.sqrt(num / (1 - z))) / (2 * z)
        return (ainf - L) / math.sqrt(delta)

    d = 1e-6
    levels = [b_at(d / 4 ** i) for i in range(4)]
    r = [2 * levels[i + 1] - levels[i] for i in range(3)]
    s = [(4 * r[i + 1] - r[i]) / 3 for i in range(2)]
    return (8 * s[1] - s[0]) / 7


def b_inf(rho: float = _RHO) -> float:
    """Square-root coefficient of the plain series at ρ.

    Computed analytically and by near-singularity extrapolation; the two
    routes must agree to 1e−9 or the calibration is rejected.
    """
    analytic = _b_inf_analytic(rho)
    fitted = _b_inf_extrapolated(rho)
    if abs(analytic - fitted) > 1e-9:
        raise NumericsError(
            f"square-root coefficient routes disagree: {analytic!r} vs {fitted!r}"
        )
    return analytic


def growth_constant(rho: float = _RHO) -> float:
    """C in the plain-count asymptotics C·n^(−3/2)·ρ^(−n)."""
    return b_inf(rho) / (2 * math.sqrt(math.pi))


# ---------------------------------------------------------------------------
# the openness ladder at the singularity


def puiseux_ladder(depth: int = 64, rho: float = _RHO) -> Tuple[List[float], List[float]]:
    """(a_m, b_m) for m = 0..depth, closed at `depth` with the plain values.

    Level m solves L_m = zL_{m+1} + zL_m² + z(1−z^m)/(1−z); its local
    expansion constants follow from the quadratic formula applied at ρ.
    """
    if depth < 1:
        raise NumericsError("ladder depth must be positive")
    a = [0.0] * (depth + 1)
    b = [0.0] * (depth + 1)
    a[depth] = a_inf(rho)
    b[depth] = b_inf(rho)
    for m in range(depth - 1, -1, -1):
        supply = rho * (1 - rho ** m) / (1 - rho)
        q = 1 - 4 * rho * (rho * a[m + 1] + supply)
        if q <= 0:
            raise NumericsError(f"ladder level {m} lost its square-root expansion")
        root = math.sqrt(q)
        a[m] = (1 - root) / (2 * rho)
        b[m] = rho * b[m + 1] / root
    return a, b


def ladder_convergence_ratio(lo: int = 8, hi: int = 48, digits: int = 60) -> float:
    """|b_hi − b∞| / |b_lo − b∞|, measured in decimal arithmetic.

    The float64 ladder bottoms out near 1e−11 absolute error, which hides the
    geometric ρ-per-level tail once the levels get deep.  Re-running the same
    recurrence in `decimal` keeps the tail visible; the returned ratio sits at
    roughly ρ^(hi−lo).
    """
    from decimal import Decimal, localcontext

    if not 0 <= lo < hi:
        raise NumericsError("need 0 <= lo < hi")
    with localcontext() as ctx:
        ctx.prec = digits
        one = Decimal(1)
        rho = Decimal(repr(_RHO))
        for _ in range(6):  # Newton on z³ + z² + 3z − 1, quadratic convergence
            f = ((rho + 1) * rho + 3) * rho - 1
            df = (3 * rho + 2) * rho + 3
            rho -= f / df
        ainf = (one - rho) / (2 * rho)
        binf = (rho * (3 + 2 * rho + 3 * rho * rho) / (one - rho)).sqrt() / (2 * rho)
        depth = hi + 80  # closure error at level hi ≈ ρ^80, far below the signal
        a, b = ainf, binf
        levels: dict[int, Decimal] = {}
        for m in range(depth - 1, -1, -1):
            supply = rho * (one - rho ** m) / (one - rho)
            root = (one - 4 * rho * (rho * a + supply)).sqrt()
            a = (one - root) / (2 * rho)
            b = rho * b / root
            if m in (lo, hi):
                levels[m] = b
        return float(abs(levels[hi] - binf) / abs(levels[lo] - binf))


def m_openness_mean(depth: int = 64) -> float:
    """Limit mean openness of a plain term: Σ_m (1 − b_m/b∞)."""
    _, b = puiseux_ladder(depth)
    binf = b[depth]
    return sum(1 - b[m] / binf for m in range(depth))


def closed_density(depth: int = 64) -> float:
    """Limit probability b₀/b∞ that a plain term is closed."""
    _, b = puiseux_ladder(depth)
    return b[0] / b[depth]


def openness_law(depth: int = 64, kmax: int = 48) -> List[float]:
    """Limit distribution of openness: P(m) = (b_m − b_{m−1})/b∞."""
    _, b = puiseux_ladder(depth)
    binf = b[depth]
    out = [b[0] / binf]
    for m in range(1, kmax + 1):
        out.append((b[min(m, depth)] - b[min(m - 1, depth)]) / binf)
    return out


def closed_head_abs_law(depth: int = 64, kmax: int = 80) -> Tuple[List[float], float, float]:
    """Limit law of head-abstraction counts in closed terms.

    A closed term with k head abstractions is λ^k applied to a k-open
    non-abstraction, so the limit mass at k is proportional to
    ρ^k·2ρ·a_k·b_k.  Returns (probabilities, mean, variance).
    """
    a, b = puiseux_ladder(depth)
    w = []
    for k in range(kmax + 1):
        i = min(k, depth)
        w.append(rho_power(k) * a[i] * b[i])
    total = sum(w)
    probs = [x / total for x in w]
    mean = sum(k * p for k, p in enumerate(probs))
    second = sum(k * k * p for k, p in enumerate(probs))
    return probs, mean, second - mean * mean


def rho_power(k: int, rho: float = _RHO) -> float:
    return rho ** k


def geometric_law(kmax: int, rho: float = _RHO) -> List[float]:
    """Geom(ρ) masses (1−ρ)ρ^k for k = 0..kmax — the limit law of both
    plain head-abstraction counts and plain index values."""
    return [(1 - rho) * rho ** k for k in range(kmax + 1)]


def free_variable_mean(rho: float = _RHO) -> float:
    """Limit mean number of free-variable occurrences in a plain term."""
    return 2 / (1 - rho) ** 3


def plain_head_abs_mean(rho: float = _RHO) -> float:
    return rho / (1 - rho)


# ---------------------------------------------------------------------------
# redex-search cost (formula variant; see series.solve_redex_search_formula)


def _motzkin_value(w: complex) -> complex:
    return (1 - w - cmath.sqrt((1 + w) * (1 - 3 * w))) / (2 * w)


def _lo_formula_sqrt_coeff(u: complex, rho: float) -> complex:
    """√-coefficient of the cost-marked series at ρ, as a function of u.

    The marked series is an explicit rational function G(ℓ, z, u) of the
    plain series ℓ = L∞(z); substituting the local expansion of ℓ turns
    the √ coefficient into b∞·∂G/∂ℓ at (a∞, ρ, u).
    """
    ell = a_inf(rho)
    z = rho
    Mv = _motzkin_value(z * u)
    num = z * u * Mv * ell - (z * u * ell) ** 2 - z * u / (1 - z)
    den = z * u * Mv - (1 - z * u * ell) * (1 - z * u)
    num_l = z * u * Mv - 2 * (z * u) ** 2 * ell
    den_l = z * u * (1 - z * u)
    return b_inf(rho) * (num_l * den - num * den_l) / (den * den)


def lo_search_mean(rho: float = _RHO) -> float:
    """Limit mean of the subtraction-form redex-search cost series."""
    h = 1e-30
    v = _lo_formula_sqrt_coeff(complex(1.0, h), rho)
    return v.imag / h / v.real


# ---------------------------------------------------------------------------
# Gaussian parameters: exact mean/variance slopes via the discriminants
#
# Each single-mark system reduces to a quadratic in L whose discriminant
# D(z, u) vanishes along the singular curve z = ρ(u); implicit
# differentiation at (ρ, 1) then gives the drift and diffusion constants
# of the associated central limit behaviour.


def _discriminant_partials(name: str, r: float) -> Tuple[float, float, float, float, float]:
    u = 1.0
    if name == "variables":
        # D = (1−z)³ − 4uz²
        return (-3 * (1 - r) ** 2 - 8 * u * r, -4 * r * r,
                6 * (1 - r) - 8 * u, -8 * r, 0.0)
    if name == "successors":
        # D = (1−z)²(1−uz) − 4z²
        return (-2 * (1 - r) * (1 - u * r) - u * (1 - r) ** 2 - 8 * r,
                -r * (1 - r) ** 2,
                2 * (1 - u * r) + 4 * u * (1 - r) - 8,
                2 * r * (1 - r) - (1 - r) ** 2,
                0.0)
    if name == "abstractions":
        # D = (1−uz)²(1−z) − 4z²
        return (-2 * u * (1 - u * r) * (1 - r) - (1 - u * r) ** 2 - 8 * r,
                -2 * r * (1 - u * r) * (1 - r),
                2 * u * u * (1 - r) + 4 * u * (1 - u * r) - 8,
                -2 * (1 - u * r) * (1 - r) + 2 * u * r * (1 - r) + 2 * r * (1 - u * r),
                2 * r * r * (1 - r))
    if name == "redexes":
        # D = (1−z)³ − 4z²(uz + 1 − z)
        return (-3 * (1 - r) ** 2 - 12 * u * r * r - 8 * r + 12 * r * r,
                -4 * r ** 3,
                6 * (1 - r) - 24 * u * r - 8 + 24 * r,
                -12 * r * r,
                0.0)
    raise NumericsError(f"no Gaussian law for parameter {name!r}")


def gaussian_parameter_laws(rho: float = _RHO) -> Dict[str, Tuple[float, float]]:
    """Exact limit constants per parameter: E[Xₙ] ~ μ·n, Var[Xₙ] ~ σ²·n."""
    out = {}
    for name in GAUSSIAN_PARAMETERS:
        dz, du, dzz, dzu, duu = _discriminant_partials(name, rho)
        rp = -du / dz
        rpp = -(dzz * rp * rp + 2 * dzu * rp + duu) / dz
        mu = -rp / rho
        sigma2 = (rp / rho) ** 2 - rpp / rho - rp / rho
        out[name] = (mu, sigma2)
    return out


# ---------------------------------------------------------------------------
# height profiles


def height_constants(rho: float = _RHO) -> Tuple[float, float]:
    """(unary, natural) Rayleigh scale constants 2b∞ and 2b∞ρ."""
    beta = 2 * b_inf(rho)
    return beta, beta * rho


def rayleigh_mean(n: float, constant: float) -> float:
    """Mean of the limiting height law at size n, √(πn)/constant."""
    return math.sqrt(math.pi * n) / constant


def profile_amplitudes(rho: float = _RHO) -> Dict[str, float]:
    """Per-kind prefactors of the height-profile Rayleigh densities.

    E[#nodes of a kind at height x√n] ≈ amp·√n·x·exp(−C²x²/4) with C the
    matching scale constant; the prefactor is block(ρ)·C/b∞.  Variable and
    application amplitudes coincide through the defining cubic.
    """
    ainf = a_inf(rho)
    return {
        "unary_variable": 2 * ainf * ainf,
        "unary_abstraction": 2 * ainf,
        "unary_application": 2 * ainf * ainf,
        "natural_variable": (1 - rho) ** 2 / 2,
        "natural_abstraction": rho * (1 - rho),
        "natural_application": (1 - rho) ** 2 / 2,
    }


# ---------------------------------------------------------------------------
# h-shallow families


def h_shallow_radicand(z: float, h: int) -> float:
    return (1 - z) ** 2 - 4 * z * z * (1 - z ** (h + 1)) / (1 - z)


def h_shallow_singularity(h: int) -> float:
    """Dominant singularity of the saturated h-shallow level."""
    if h < 0:
        raise NumericsError("shallowness bound must be non-negative")
    lo, hi = 0.25, 0.34
    if h_shallow_radicand(lo, h) <= 0 or h_shallow_radicand(hi, h) >= 0:
        raise NumericsError("h-shallow bisection bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h_shallow_radicand(mid, h) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def h_shallow_ladder(h: int) -> Tuple[float, List[float]]:
    """(ρ_h, level values at ρ_h) for levels 0..h+1; the saturated level
    h+1 evaluates to (1−z)/(2z) exactly at the singularity."""
    rho_h = h_shallow_singularity(h)
    values = [0.0] * (h + 2)
    values[h + 1] = (1 - rho_h) / (2 * rho_h)
    for m in range(h, -1, -1):
        supply = rho_h * (1 - rho_h ** m) / (1 - rho_h)
        q = 1 - 4 * rho_h * (rho_h * values[m + 1] + supply)
        if q < 0:
            raise NumericsError(f"h-shallow level {m} has no real expansion point")
        values[m] = (1 - math.sqrt(q)) / (2 * rho_h)
    return rho_h, values


# ---------------------------------------------------------------------------
# one-stop table


@dataclass(frozen=True)
class AsymptoticTable:
    """Everything the singularity analysis yields, in one frozen bundle.

    `a` and `b` are the Puiseux constant/√-coefficient sequences of the
    openness ladder, levels 0..depth; `derived` collects the named scalar
    limit constants built from them.
    """

    rho: float
    C_plain: float
    a: List[float]
    b: List[float]
    a_inf: float
    b_inf: float
    derived: Dict[str, float]
    gaussian: Dict[str, Tuple[float, float]]
    profile_amplitudes: Dict[str, float]


def limit_constants(depth: int = 64) -> AsymptoticTable:
    rho = compute_rho()
    a, b = puiseux_ladder(depth, rho)
    _, ha_mean, ha_var = closed_head_abs_law(depth)
    unary_c, natural_c = height_constants(rho)
    return AsymptoticTable(
        rho=rho,
        C_plain=growth_constant(rho),
        a=a,
        b=b,
        a_inf=a_inf(rho),
        b_inf=b_inf(rho),
        derived={
            "head_abs_mean_plain": plain_head_abs_mean(rho),
            "head_abs_mean_closed": ha_mean,
            "head_abs_variance_closed": ha_var,
            "lo_mean_plain": lo_search_mean(rho),
            "free_var_mean": free_variable_mean(rho),
            "m_openness_mean": m_openness_mean(depth),
            "closed_density": closed_density(depth),
            "height_unary_C": unary_c,
            "height_natural_C": natural_c,
            "growth_rate": 1.0 / rho,
        },
        gaussian=gaussian_parameter_laws(rho),
        profile_amplitudes=profile_amplitudes(rho),
    )
