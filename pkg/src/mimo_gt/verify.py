"""Built-in invariant checks behind ``mimo-gt verify``.

Each check is sized to run in seconds and reports its measured values; the
pytest suite runs the same properties at full scale.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import analysis, montecarlo
from .decoder import noisy_coma_decode
from .params import SystemParams, validate
from .phy import boolean_sum, draw_round, energy_detect, generate_codebook, transmit_round


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool | None  # None: informational only
    detail: str


def _check_energy(params, workers):
    samples = 200_000
    reports = montecarlo.energy_moment_check(
        [0, 1, 2, 5], params.power, params.noise, samples, seed=params.seed
    )
    worst_mean = max(abs(r.mean / r.expected_mean - 1.0) for r in reports)
    worst_ks = max(r.ks_statistic / r.ks_critical for r in reports)
    ok = worst_mean <= 0.01 and worst_ks < 1.0
    return CheckResult(
        "energy", ok,
        f"J in (0,1,2,5), {samples} samples: max |mean err| = {worst_mean:.4%}, "
        f"max KS/critical = {worst_ks:.3f}",
    )


def _crossover_params(params):
    return validate(replace(
        params, k_active=3, n_users=max(params.n_users, 3), bernoulli_p=0.3,
        power=1.0, noise=0.1, threshold_gamma=1.0, m_rx=32, m_tx=32,
    ))


def _check_crossovers(params, workers):
    p = _crossover_params(params)
    q01_hat, q10_hat = montecarlo.estimate_crossovers(p, 3000, workers=workers)
    q01 = analysis.q01_analytic(p.threshold_gamma)
    q10 = analysis.q10_analytic(p.k_active, p.bernoulli_p, p.snr, p.threshold_gamma)
    ok = q01_hat.ci_low <= q01 <= q01_hat.ci_high and q10_hat.ci_low <= q10 <= q10_hat.ci_high
    return CheckResult(
        "crossovers", ok,
        f"analytic q01={q01:.5f} in [{q01_hat.ci_low:.5f},{q01_hat.ci_high:.5f}], "
        f"q10={q10:.5f} in [{q10_hat.ci_low:.5f},{q10_hat.ci_high:.5f}]",
    )


def _check_noise_independence(params, workers):
    base = _crossover_params(params)
    intervals = []
    for noise in (0.1, 1.0, 10.0):
        p = validate(replace(base, noise=noise))
        q01_hat, _ = montecarlo.estimate_crossovers(p, 1500, workers=workers)
        intervals.append((q01_hat.ci_low, q01_hat.ci_high))
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return CheckResult(
        "noise-independence", lo <= hi,
        f"q01 CIs for N0 in (0.1, 1, 10) share [{lo:.5f},{hi:.5f}]"
        if lo <= hi else f"q01 CIs disjoint: {intervals}",
    )


def _check_equalizer(params, workers):
    # tuples drawn from the optimizer's own domain, alpha = K p <= e-1
    rng = np.random.default_rng(params.seed)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 50))
        alpha = float(rng.uniform(0.05, min(math.e - 1.0, k / 2.0)))
        p = alpha / k
        gamma = float(rng.uniform(0.05, 5.0))
        rho = float(10.0 ** rng.uniform(-1.5, 2.0))
        probs = analysis.crossover_probs(k, p, rho, gamma)
        if probs.q10 <= 0 or probs.p0 <= probs.q10:
            continue
        dstar = analysis.delta_star(probs.p0, probs.q10)
        pair = analysis.beta_pair(k, p, probs.q10, probs.p0, dstar)
        worst = max(worst, abs(pair.beta1 - pair.beta2) / pair.beta1)
    return CheckResult(
        "equalizer", worst <= 1e-9,
        f"max relative |beta1 - beta2| at delta* over 100 tuples = {worst:.3e}",
    )


def _check_stationarity(params, workers):
    worst_fp, min_fpp = 0.0, math.inf
    for k in (1, 2, 5, 20):
        for rho in (0.1, 1.0, 10.0):
            p = min(0.5, 0.5 / k) if k > 1 else 0.3
            g = analysis.gamma_star(k, p, rho)
            _, fp, fpp = analysis.f_gamma_derivatives(k, p, rho, g)
            worst_fp = max(worst_fp, abs(fp))
            min_fpp = min(min_fpp, fpp)
    ok = worst_fp <= 1e-12 and min_fpp > 0
    return CheckResult(
        "stationarity", ok,
        f"max |f'(gamma*)| = {worst_fp:.2e}, min f''(gamma*) = {min_fpp:.2e}",
    )


def _check_brackets(params, workers):
    alphas = np.linspace(0.05, 1.95, 20)
    ok = True
    for alpha in alphas:
        for k in (2, 5, 20, 100, 1000):
            if alpha >= k:
                continue
            val = (1.0 - alpha / k) ** (2 * k)
            if not (1.0 - alpha / 2.0) ** 4 - 1e-12 <= val <= math.exp(-2 * alpha) + 1e-12:
                ok = False
    # bound on the optimized constant where its threshold condition applies
    details = []
    for rho in (0.5, 1.0, 2.0):
        res = analysis.optimize_beta_star(100, rho)
        if 1.0 <= res.gamma_star <= max(1.0, rho):
            bound = analysis.beta_star_upper_bound(res.alpha_star, rho)
            details.append(f"rho={rho}: beta*={res.beta_star:.3f} <= {bound:.3f}")
            ok = ok and res.beta_star <= bound
        else:
            details.append(f"rho={rho}: gamma*={res.gamma_star:.3f} outside [1,max(1,rho)], skipped")
    # larger antenna counts can only shrink the error bounds
    k, p, q10, p0, delta = 3, 0.2, 0.1, 0.5, 1.0
    pmd = [analysis.pmd_upper_bound(k, p, m, q10, delta) for m in (64, 128, 256, 512)]
    pfa = [analysis.pfa_upper_bound(48, k, p, m, p0, q10, delta) for m in (64, 128, 256, 512)]
    ok = ok and all(b < a for a, b in zip(pmd, pmd[1:])) and all(
        b < a for a, b in zip(pfa, pfa[1:])
    )
    return CheckResult("brackets", ok, "; ".join(details))


def _brute_force_accept(words, y_bits, q10, delta):
    hot = {i for i, b in enumerate(y_bits) if b}
    accepted = []
    for j, word in enumerate(words):
        support = {i for i, b in enumerate(word) if b}
        if support and len(support & hot) >= len(support) * (1.0 - q10 * (delta + 1.0)):
            accepted.append(j)
    return accepted


def _check_decoder(params, workers):
    rng = np.random.default_rng(params.seed)
    m_r, n_words = 8, 12
    mismatches = 0
    for _ in range(3):
        book_params = validate(replace(
            params, n_users=n_words, msgs_per_user=1, m_rx=m_r, m_tx=m_r,
            bernoulli_p=0.4,
        ))
        book = generate_codebook(book_params, rng)
        q10, delta = 0.15, 1.0
        for value in range(2**m_r):
            y = np.array([(value >> i) & 1 for i in range(m_r)], dtype=np.uint8)
            got = noisy_coma_decode(y, book, q10, delta).accepted.tolist()
            want = _brute_force_accept(book.words, y, q10, delta)
            mismatches += got != want
    return CheckResult(
        "decoder", mismatches == 0,
        f"3 codebooks x {2**m_r} result vectors: {mismatches} mismatches vs brute force",
    )


def _check_boolean_sum(params, workers):
    p = validate(replace(
        params, k_active=2, n_users=8, msgs_per_user=2, m_rx=16, m_tx=16,
        bernoulli_p=0.5, noise=1e-40 * params.power,
    ))
    rng = np.random.default_rng(p.seed)
    detector_noise = 1e-12 * p.power
    matches = 0
    rounds = 2000
    for _ in range(rounds):
        book = generate_codebook(p, rng)
        active, chosen = draw_round(p, book, rng)
        round_ = transmit_round(p, book, active, chosen, rng)
        bits = energy_detect(round_.received, detector_noise, 1.0)
        matches += bool(np.array_equal(bits, boolean_sum(book, chosen)))
    frac = matches / rounds
    return CheckResult(
        "boolean-sum", frac >= 0.999,
        f"noise-free detection equals the OR of sent words in {frac:.2%} of {rounds} rounds",
    )


def _check_codebook_stability(params, workers):
    p = _crossover_params(params)
    _, a = montecarlo.estimate_crossovers(p, 1200, workers=workers, fresh_codebook=False)
    q = validate(replace(p, seed=p.seed + 1))
    _, b = montecarlo.estimate_crossovers(q, 1200, workers=workers, fresh_codebook=False)
    width = a.ci_high - a.ci_low
    return CheckResult(
        "codebook-stability", None,
        f"fixed-codebook q10 moved {abs(a.point - b.point):.5f} across redraws "
        f"(CI width {width:.5f}); informational",
    )


_CHECKS = {
    "energy": _check_energy,
    "crossovers": _check_crossovers,
    "noise-independence": _check_noise_independence,
    "equalizer": _check_equalizer,
    "stationarity": _check_stationarity,
    "brackets": _check_brackets,
    "decoder": _check_decoder,
    "boolean-sum": _check_boolean_sum,
    "codebook-stability": _check_codebook_stability,
}


def run_checks(params: SystemParams, only: str | None = None, workers: int = 1):
    names = [only] if only else list(_CHECKS)
    return [_CHECKS[n](params, workers) for n in names if n in _CHECKS]
