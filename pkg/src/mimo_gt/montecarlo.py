"""Reproducible Monte Carlo harness.

Every trial draws its own PRNG stream keyed by (master seed, stream tag,
trial index), so estimates are bit-identical for any number of workers and
any partition of the trial range.  Counters are integers and summed, which
makes the reduction order irrelevant.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import special, stats

from . import analysis
from .decoder import noisy_coma_decode, score_round
from .params import SystemParams
from .phy import (
    ZeroCodewordError,
    draw_round,
    energy_detect,
    format_round_record,
    generate_codebook,
    rzf_beamform,
    sample_cgrv,
    sample_channel,
    transmit_round,
)

# Stream tags keep the estimators' randomness disjoint under one master seed.
CODEBOOK_STREAM = 1
CROSSOVER_STREAM = 10
ERROR_STREAM = 20
ENERGY_STREAM = 30

ENERGY_BATCH = 1 << 15


def trial_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, index])


@dataclass(frozen=True)
class EstimateWithCI:
    """Binomial point estimate with a Wilson score interval."""

    point: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> EstimateWithCI:
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials!r}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes!r} out of range for trials={trials!r}")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z**2 / trials
    center = (phat + z**2 / (2.0 * trials)) / denom
    margin = z / denom * math.sqrt(phat * (1.0 - phat) / trials + z**2 / (4.0 * trials**2))
    return EstimateWithCI(
        point=phat,
        ci_low=max(0.0, center - margin),
        ci_high=min(1.0, center + margin),
        successes=successes,
        trials=trials,
    )


def _partition(total: int, workers: int):
    """Contiguous index ranges; the split never affects results, only scheduling."""
    workers = max(1, min(workers, total))
    step = math.ceil(total / workers)
    return [(start, min(start + step, total)) for start in range(0, total, step)]


def _run_partitioned(fn, args, trials: int, workers: int) -> np.ndarray:
    ranges = _partition(trials, workers)
    if len(ranges) == 1:
        return fn((*args, *ranges[0]))
    with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
        parts = list(pool.map(fn, [(*args, lo, hi) for lo, hi in ranges]))
    return np.sum(parts, axis=0)


# ---------------------------------------------------------------------------
# Crossover probabilities q01 / q10
# ---------------------------------------------------------------------------

def _round_words(params: SystemParams, codebook, rng):
    """Active users' codewords for one round (fresh Bernoulli draw or codebook rows)."""
    if codebook is None:
        return (rng.random((params.k_active, params.m_rx)) < params.bernoulli_p).astype(np.uint8)
    _, chosen = draw_round(params, codebook, rng)
    return codebook.words[chosen]


def _crossover_counts(task) -> np.ndarray:
    params, codebook, lo, hi = task
    counts = np.zeros(4, dtype=np.int64)  # silent, silent-flips, targeted, targeted-misses
    threshold = params.noise * params.threshold_gamma
    for t in range(lo, hi):
        rng = trial_rng(params.seed, CROSSOVER_STREAM, t)
        words = _round_words(params, codebook, rng)
        targeted = words.sum(axis=0) >= 1
        y = np.zeros(params.m_rx, dtype=complex)
        for word in words:
            h = sample_channel(params, rng)
            try:
                x = rzf_beamform(h, word, params.power)
            except ZeroCodewordError:
                continue
            y += h @ x
        y += sample_cgrv(rng, params.noise, params.m_rx)
        hot = np.abs(y) ** 2 > threshold
        counts[0] += np.count_nonzero(~targeted)
        counts[1] += np.count_nonzero(hot & ~targeted)
        counts[2] += np.count_nonzero(targeted)
        counts[3] += np.count_nonzero(~hot & targeted)
    return counts


def estimate_crossovers(
    params: SystemParams,
    trials: int,
    workers: int = 1,
    fresh_codebook: bool = True,
    confidence: float = 0.99,
):
    """Empirical q01 and q10, pooled per antenna across ``trials`` rounds.

    Conditioning uses the ground-truth number of users targeting each antenna,
    taken from the transmitted words' supports.  By default codewords are
    redrawn each round (matching the i.i.d.-bit setting of the closed forms);
    ``fresh_codebook=False`` holds one codebook fixed and draws active sets.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    codebook = None
    if not fresh_codebook:
        codebook = generate_codebook(params, trial_rng(params.seed, CODEBOOK_STREAM, 0))
    silent, flips, targeted, misses = _run_partitioned(
        _crossover_counts, (params, codebook), trials, workers
    )
    q01_hat = wilson_interval(int(flips), int(silent), confidence)
    q10_hat = wilson_interval(int(misses), int(targeted), confidence)
    return q01_hat, q10_hat


# ---------------------------------------------------------------------------
# End-to-end miss-detection / false-alarm rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorRateEstimates:
    pmd: EstimateWithCI
    pfa: EstimateWithCI
    p_e: EstimateWithCI  # any scoring error; union bound gives p_e <= pmd + pfa


def _error_counts(task, dump=None) -> np.ndarray:
    params, codebook, q10, lo, hi = task
    counts = np.zeros(3, dtype=np.int64)  # misses, false alarms, any error
    for t in range(lo, hi):
        rng = trial_rng(params.seed, ERROR_STREAM, t)
        book = codebook if codebook is not None else generate_codebook(params, rng)
        active, chosen = draw_round(params, book, rng)
        round_ = transmit_round(params, book, active, chosen, rng)
        bits = energy_detect(round_.received, params.noise, params.threshold_gamma)
        decision = noisy_coma_decode(bits, book, q10, params.relax_delta)
        miss, false_alarm = score_round(round_, decision)
        counts += (miss, false_alarm, miss or false_alarm)
        if dump is not None:
            dump.write(format_round_record(active, chosen, bits) + "\n")
    return counts


def estimate_error_rates(
    params: SystemParams,
    m_r: int,
    trials: int,
    q10: float | None = None,
    workers: int = 1,
    fresh_codebook: bool = True,
    confidence: float = 0.99,
    dump_path: str | None = None,
) -> ErrorRateEstimates:
    """Full-pipeline error rates at ``m_r`` antennas over ``trials`` rounds.

    The decoder runs at the designed operating point: ``q10`` defaults to the
    analytic crossover probability for the given parameters.  ``dump_path``
    writes one round record per line (active set, word indices, detected bits)
    and forces a serial run so the records stay in trial order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    params = replace(params, m_rx=m_r, m_tx=m_r)
    if q10 is None:
        q10 = analysis.q10_analytic(
            params.k_active, params.bernoulli_p, params.power / params.noise,
            params.threshold_gamma,
        )
    codebook = None
    if not fresh_codebook:
        codebook = generate_codebook(params, trial_rng(params.seed, CODEBOOK_STREAM, 0))
    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            misses, alarms, errors = _error_counts(
                (params, codebook, q10, 0, trials), dump=fh
            )
    else:
        misses, alarms, errors = _run_partitioned(
            _error_counts, (params, codebook, q10), trials, workers
        )
    return ErrorRateEstimates(
        pmd=wilson_interval(int(misses), trials, confidence),
        pfa=wilson_interval(int(alarms), trials, confidence),
        p_e=wilson_interval(int(errors), trials, confidence),
    )


# ---------------------------------------------------------------------------
# Conditional energy distribution at one antenna
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    j_users: int
    samples: int
    mean: float
    variance: float
    expected_mean: float     # j*P + N0; the exponential law has variance mean^2
    ks_statistic: float
    ks_critical: float       # one-sample KS threshold at ``alpha``
    alpha: float


def _energy_samples_batch(
    j_users: int, power: float, noise: float, m_antennas: int, rng: np.random.Generator, n: int
) -> np.ndarray:
    """|y|^2 at antenna 0 with ``j_users`` zero-forcing users all targeting it.

    Each user transmits the word (1, 0, ..., 0): its beam nulls every antenna
    but the first.  The per-user direction is the all-ones probe projected
    onto that nullspace, the same construction as the reference beamformer,
    batched over channel draws with stacked solves.
    """
    probe = np.ones(m_antennas, dtype=complex)
    y = np.zeros(n, dtype=complex)
    for _ in range(j_users):
        h = sample_cgrv(rng, 1.0, (n, m_antennas, m_antennas))
        a = h[:, 1:, :]
        ah = a.conj().transpose(0, 2, 1)
        gram = a @ ah

        def reject(vec):
            u = np.linalg.solve(gram, a @ vec[..., None])
            return vec - (ah @ u)[..., 0]

        v = reject(reject(np.broadcast_to(probe, (n, m_antennas)).copy()))
        if np.abs(a @ v[..., None]).max() > 1e-8:
            raise RuntimeError("rank-deficient channel draw in batched beamformer")
        x = math.sqrt(power) * v / np.linalg.norm(v, axis=1, keepdims=True)
        y += np.einsum("ni,ni->n", h[:, 0, :], x)
    y += sample_cgrv(rng, noise, n)
    return np.abs(y) ** 2


def energy_moment_check(
    j_targets,
    power: float,
    noise: float,
    samples: int,
    seed: int = 0,
    m_antennas: int = 4,
    alpha: float = 0.01,
):
    """Check the exponential energy law at a single antenna for each J in ``j_targets``.

    Returns one :class:`EnergyReport` per J with the sample mean/variance and a
    one-sample Kolmogorov-Smirnov statistic against Exp(1/(J*P + N0)).
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples!r}")
    if m_antennas < 2:
        raise ValueError("need at least 2 antennas to have something to null")
    reports = []
    for j_users in j_targets:
        chunks = []
        n_batches = math.ceil(samples / ENERGY_BATCH)
        for b in range(n_batches):
            n = min(ENERGY_BATCH, samples - b * ENERGY_BATCH)
            rng = np.random.default_rng([seed, ENERGY_STREAM, j_users, b])
            if j_users == 0:
                chunks.append(np.abs(sample_cgrv(rng, noise, n)) ** 2)
            else:
                chunks.append(
                    _energy_samples_batch(j_users, power, noise, m_antennas, rng, n)
                )
        energy = np.concatenate(chunks)
        expected = j_users * power + noise
        ks = stats.kstest(energy, "expon", args=(0.0, expected)).statistic
        reports.append(
            EnergyReport(
                j_users=j_users,
                samples=samples,
                mean=float(energy.mean()),
                variance=float(energy.var()),
                expected_mean=expected,
                ks_statistic=float(ks),
                ks_critical=float(special.kolmogi(alpha)) / math.sqrt(samples),
                alpha=alpha,
            )
        )
    return reports
