"""Closed-form link analysis: crossover probabilities, error bounds, the
antenna-scaling optimization, scaling-law limits, converse bound, and rate
comparisons.

Everything here is a pure function of scalar parameters; ``gamma`` arguments
additionally accept numpy arrays and broadcast, which the sweep and grid
checks rely on.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

LN2 = math.log(2.0)
E_MINUS_1 = math.e - 1.0

# Symbolic remainder of the full-CSI rate ratio; its constant is not pinned
# anywhere, so it is reported as an annotation and never evaluated.
FULL_CSI_RATIO_REMAINDER = "O(log(K^2 *log(N*M)) / (K*log(N*M)))"


# ---------------------------------------------------------------------------
# Crossover probabilities of the per-antenna hard decision
# ---------------------------------------------------------------------------

def _active_count_weights(k: int, p: float):
    """P(J = j | J >= 1) for j = 1..K with J ~ Bin(K, p), in the log domain."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    j = np.arange(1, k + 1)
    log_pmf = stats.binom.logpmf(j, k, p)
    # log(1 - (1-p)^K) without cancellation
    log_norm = math.log(-math.expm1(k * math.log1p(-p)))
    return j, np.exp(log_pmf - log_norm)


def q01_analytic(gamma):
    """Probability a silent antenna crosses the threshold: exp(-gamma)."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be >= 0")
    out = np.exp(-gamma)
    return float(out) if out.ndim == 0 else out


def q10_analytic(k: int, p: float, rho: float, gamma):
    """Probability a targeted antenna stays under the threshold.

    Sum over the number of users j targeting the antenna (conditioned on
    j >= 1) of the exponential-energy CDF at the normalized threshold.
    Binomial terms are computed in the log domain, so K up to 1e4 is fine.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    j, w = _active_count_weights(k, p)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be >= 0")
    terms = -np.expm1(-gamma[..., None] / (j * rho + 1.0))
    out = (w * terms).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def q10_poisson_limit(alpha: float, rho: float, gamma: float, tail_tol: float = 1e-12) -> float:
    """Large-population limit of q10 with p = alpha/K fixed.

    Replaces the binomial mixture by a Poisson(alpha) mixture, truncated once
    the remaining Poisson tail mass drops below ``tail_tol``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if not tail_tol > 0:
        raise ValueError(f"tail_tol must be positive, got {tail_tol!r}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    j_max = int(stats.poisson.isf(tail_tol, alpha)) + 1
    while stats.poisson.sf(j_max, alpha) >= tail_tol:
        j_max += 1
    j = np.arange(1, j_max + 1)
    pmf = stats.poisson.pmf(j, alpha)
    kept = float((pmf * np.exp(-gamma / (j * rho + 1.0))).sum())
    return 1.0 - kept / (-math.expm1(-alpha))


def p0_analytic(k: int, p: float, q01: float, q10: float) -> float:
    """Probability an antenna reads '0': targeted-but-missed or silent-and-quiet."""
    silent = math.exp(k * math.log1p(-p))  # (1-p)^K
    return (1.0 - silent) * q10 + silent * (1.0 - q01)


@dataclass(frozen=True)
class CrossoverProbs:
    """Operating-point channel of the hard decisions: flips and marginals."""

    q01: float
    q10: float
    p0: float
    p1: float


def crossover_probs(k: int, p: float, rho: float, gamma: float) -> CrossoverProbs:
    q01 = q01_analytic(gamma)
    q10 = q10_analytic(k, p, rho, gamma)
    p0 = p0_analytic(k, p, q01, q10)
    return CrossoverProbs(q01=q01, q10=q10, p0=p0, p1=1.0 - p0)


# ---------------------------------------------------------------------------
# Decoder error bounds and the antenna-scaling constants
# ---------------------------------------------------------------------------

def pmd_upper_bound(k: int, p: float, m_r: float, q10: float, delta: float) -> float:
    """Upper bound on missing at least one transmitted codeword.

    Can exceed 1 (vacuous) for small m_r; callers clamp for reporting.
    """
    return k * math.exp(-m_r * p * -math.expm1(-2.0 * (q10 * delta) ** 2))


def pfa_upper_bound(
    nm: int, k: int, p: float, m_r: float, p0: float, q10: float, delta: float
) -> float:
    """Upper bound on declaring at least one false codeword.

    Requires delta < p0/q10 - 1 so the concentration argument applies.
    """
    margin = p0 - q10 * (delta + 1.0)
    if margin <= 0:
        raise ValueError(
            f"delta={delta!r} violates delta < p0/q10 - 1 = {p0 / q10 - 1.0!r}"
        )
    return (nm - k) * math.exp(-m_r * p * -math.expm1(-2.0 * margin**2))


@dataclass(frozen=True)
class BetaPair:
    """Sufficient antenna-scaling constants for the two error types.

    Convention: these scale the natural-log antenna rule
    M_r >= (1+delta) beta K ln(N*M).  Under the alternative
    M_r >= beta' K log2(N*M) rule the same quantities read
    beta' = (1+delta) ln(2) beta.
    """

    beta1: float  # miss-detection side; infinite when q10*delta == 0
    beta2: float  # false-alarm side; infinite when delta >= p0/q10 - 1
    delta_used: float


def beta_pair(k: int, p: float, q10: float, p0: float, delta: float) -> BetaPair:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    md_gap = -math.expm1(-2.0 * (q10 * delta) ** 2)
    beta1 = 1.0 / (k * p * md_gap) if md_gap > 0 else math.inf
    margin = p0 - q10 * (delta + 1.0)
    if margin > 0:
        fa_gap = -math.expm1(-2.0 * margin**2)
        beta2 = 1.0 / (k * p * fa_gap) if fa_gap > 0 else math.inf
    else:
        beta2 = math.inf
    return BetaPair(beta1=beta1, beta2=beta2, delta_used=delta)


def delta_star(p0: float, q10: float) -> float:
    """Relaxation that equalizes the two scaling constants: (p0/q10 - 1) / 2."""
    if q10 <= 0:
        raise ValueError("delta* undefined for q10 = 0 (miss-detection side is free)")
    if p0 < q10:
        raise ValueError(f"need p0 >= q10, got p0={p0!r} < q10={q10!r}")
    return 0.5 * (p0 / q10 - 1.0)


def beta_objective(k: int, p: float, gamma, rho: float):
    """Equalized antenna-scaling constant as a function of (p, gamma).

    1 / (K p (1 - exp(-0.5 (1-p)^(2K) (1 - q10 - q01)^2))); the minimum of
    max(beta1, beta2) over the relaxation, reached at the equalizer.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p must lie in (0, 1/2], got {p!r}")
    q01 = np.exp(-np.asarray(gamma, dtype=float))
    q10 = q10_analytic(k, p, rho, gamma)
    shrink = math.exp(2.0 * k * math.log1p(-p))  # (1-p)^(2K)
    core = 0.5 * shrink * (1.0 - q10 - q01) ** 2
    gap = -np.expm1(-core)
    with np.errstate(divide="ignore"):
        out = np.where(gap > 0, 1.0 / (k * p * np.maximum(gap, 1e-300)), np.inf)
    return float(out) if np.ndim(out) == 0 else out


def f_gamma_derivatives(k: int, p: float, rho: float, gamma):
    """Total flip probability f = q01 + q10 and its first two gamma derivatives."""
    j, w = _active_count_weights(k, p)
    gamma = np.asarray(gamma, dtype=float)
    decay = np.exp(-gamma[..., None] / (j * rho + 1.0))
    e = np.exp(-gamma)
    f = e + (w * -np.expm1(-gamma[..., None] / (j * rho + 1.0))).sum(axis=-1)
    fp = -e + (w * decay / (j * rho + 1.0)).sum(axis=-1)
    fpp = e - (w * decay / (j * rho + 1.0) ** 2).sum(axis=-1)
    if f.ndim == 0:
        return float(f), float(fp), float(fpp)
    return f, fp, fpp


def gamma_star(
    k: int,
    p: float,
    rho: float,
    fprime_tol: float = 1e-12,
    interval_tol: float = 1e-10,
) -> float:
    """Unique threshold minimizing q01 + q10, via bracketing + bisection.

    The derivative is negative at 0 and eventually positive; bisection narrows
    the bracket to ``interval_tol``, then a few guarded Newton steps polish the
    root so |f'| <= fprime_tol.
    """
    def fprime(g):
        return f_gamma_derivatives(k, p, rho, g)[1]

    limit = 1e3 * max(1.0, rho)
    lo, hi = 0.0, 1.0
    while fprime(hi) <= 0.0:
        hi *= 2.0
        if hi > limit:
            raise RuntimeError(
                f"no sign change of d(q01+q10)/dgamma in (0, {limit:g}] "
                f"for k={k}, p={p}, rho={rho}"
            )
    while hi - lo > interval_tol:
        mid = 0.5 * (lo + hi)
        if fprime(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    for _ in range(8):
        _, fp, fpp = f_gamma_derivatives(k, p, rho, root)
        if abs(fp) <= 0.01 * fprime_tol or fpp <= 0:
            break
        step = fp / fpp
        if not (lo - interval_tol <= root - step <= hi + interval_tol):
            break
        root -= step
    return root


@dataclass(frozen=True)
class OptimizationResult:
    """Solution of the antenna-scaling minimization plus solver diagnostics."""

    p_star: float
    gamma_star: float
    alpha_star: float      # k * p_star
    delta_star: float      # equalizing relaxation at the optimum
    beta_star: float
    iterations: int
    residuals: dict        # fprime, fsecond, beta_equalizer_rel


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_beta_star(
    k: int,
    rho: float,
    grid_points: int = 64,
    alpha_tol: float = 1e-10,
) -> OptimizationResult:
    """Minimize the antenna-scaling constant over (p, gamma).

    gamma is inner-solved exactly per p; the outer search runs over
    alpha = K p in (0, min(e-1, K/2)] (the optimum is known to satisfy
    alpha <= e-1), seeded with a coarse grid and refined by golden section.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    alpha_max = min(E_MINUS_1, k / 2.0)

    def objective(alpha: float) -> float:
        p = alpha / k
        return beta_objective(k, p, gamma_star(k, p, rho), rho)

    grid = alpha_max * np.arange(1, grid_points + 1) / grid_points
    values = [objective(a) for a in grid]
    best = int(np.argmin(values))
    lo = grid[best - 1] if best > 0 else grid[0] * 1e-3
    hi = grid[best + 1] if best < grid_points - 1 else grid[-1]

    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = objective(c), objective(d)
    iterations = 0
    while hi - lo > alpha_tol:
        iterations += 1
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = objective(d)
    alpha = 0.5 * (lo + hi)
    p = alpha / k
    g = gamma_star(k, p, rho)
    beta = beta_objective(k, p, g, rho)

    probs = crossover_probs(k, p, rho, g)
    dstar = delta_star(probs.p0, probs.q10)
    pair = beta_pair(k, p, probs.q10, probs.p0, dstar)
    _, fp, fpp = f_gamma_derivatives(k, p, rho, g)
    return OptimizationResult(
        p_star=p,
        gamma_star=g,
        alpha_star=alpha,
        delta_star=dstar,
        beta_star=beta,
        iterations=iterations,
        residuals={
            "fprime": fp,
            "fsecond": fpp,
            "beta_equalizer_rel": abs(pair.beta1 - pair.beta2) / pair.beta1,
        },
    )


def beta_star_upper_bound(alpha: float, rho: float) -> float:
    """Closed-form cap on the optimized scaling constant.

    Valid when the optimizing threshold falls in [1, max(1, rho)]; loose at
    high SNR, where it grows like exp(2 rho).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    return (
        8.0 * math.exp(2.0 * max(rho, 1.0)) * (rho + 1.0) ** 2
        / (3.0 * alpha * (1.0 - alpha / 2.0) ** 4 * rho**2)
    )


def required_antennas(n: int, m: int, k: int, delta: float, beta: float) -> int:
    """Antenna budget guaranteeing max(p_md, p_fa) <= (N*M)^(-delta)."""
    return math.ceil((1.0 + delta) * beta * k * math.log(n * m))


# ---------------------------------------------------------------------------
# Converse bound and rate comparisons
# ---------------------------------------------------------------------------

def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def bac_capacity(q01: float, q10: float) -> float:
    """Capacity (bits/use) of the binary asymmetric channel with the given flips.

    Degenerate channels with q01 + q10 = 1 carry nothing and return 0; the
    result is clamped to [0, 1].
    """
    if not 0.0 <= q01 <= 1.0 or not 0.0 <= q10 <= 1.0:
        raise ValueError("crossover probabilities must lie in [0, 1]")
    s = 1.0 - q01 - q10
    if s == 0.0:
        return 0.0
    h01 = binary_entropy(q01)
    h10 = binary_entropy(q10)
    cap = (
        q01 / s * h10
        - (1.0 - q10) / s * h01
        + float(np.logaddexp2(0.0, (h01 - h10) / s))
    )
    return min(1.0, max(0.0, cap))


def converse_min_antennas(
    n: int, m: int, k: int, p_e: float, q01: float, q10: float
) -> float:
    """Information-theoretic lower bound on the antenna count for K-of-N*M decoding."""
    cap = bac_capacity(q01, q10)
    if cap == 0.0:
        return math.inf
    return (1.0 - p_e) * k * math.log2(n * m / k) / cap


def converse_tightness_ratio(
    n: int, m: int, k: int, delta: float, beta_star: float, c_bac: float
) -> float:
    """Converse antenna count divided by the scheme's antenna budget.

    Tends to 1/((1+delta) beta* C_BAC ln 2) as N*M grows.
    """
    return (1.0 - math.log(k) / math.log(n * m)) / (
        (1.0 + delta) * beta_star * c_bac * LN2
    )


class RateSummary(NamedTuple):
    sum_rate: float              # bits per channel use, K log2(N*M)
    spectral_efficiency: float   # sum rate per receive antenna
    ratio_full_csi: float        # leading term of C_FullCSI / R
    ratio_round_robin: float     # leading term of C_RR / R


def rates(
    k: int, n: int, m: int, m_r: float, delta: float, beta_star: float, rho: float
) -> RateSummary:
    """Sum rate, spectral efficiency, and leading rate-loss ratios vs. scheduled baselines.

    The full-CSI ratio omits a vanishing remainder (see
    ``FULL_CSI_RATIO_REMAINDER``), reported symbolically by the CLI.
    """
    sum_rate = k * math.log2(n * m)
    ratio_csi = (1.0 + delta) * beta_star * math.log1p(rho)
    return RateSummary(
        sum_rate=sum_rate,
        spectral_efficiency=sum_rate / m_r,
        ratio_full_csi=ratio_csi,
        ratio_round_robin=k / n * ratio_csi,
    )
