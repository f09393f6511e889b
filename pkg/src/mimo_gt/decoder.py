"""Noisy column-matching group-testing decoder.

A codeword is declared transmitted when the fraction of its '1' positions
also present in the detected vector reaches the relaxed threshold
``1 - q10 * (delta + 1)``.  The decoder scans all N*M codewords, so user
identities come for free from the codebook index map.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .phy import Codebook, TransmissionRound


@dataclass(frozen=True)
class DecodeDecision:
    """Accepted word indices plus per-word statistics of the decision rule."""

    accepted: np.ndarray      # sorted codeword indices declared transmitted
    ones_count: np.ndarray    # per word: number of '1' positions
    matched_count: np.ndarray  # per word: '1' positions also set in the result vector
    thresholds: np.ndarray    # per word: ones_count * (1 - q10*(delta+1)), un-rounded
    zero_support: np.ndarray  # per word: True for all-zero words (excluded, see below)


def noisy_coma_decode(
    y_bits: np.ndarray,
    codebook: Codebook,
    q10: float,
    delta: float,
) -> DecodeDecision:
    """Apply the relaxed column-matching rule to a hard-decision result vector.

    ``q10`` is the designed crossover probability of the operating point, not
    an estimate.  All-zero codewords would pass vacuously (0 >= 0); they are
    physically untransmittable, so they are excluded and flagged instead.
    """
    if not 0.0 <= q10 < 1.0:
        raise ValueError(f"q10 must lie in [0, 1), got {q10!r}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    relaxation = q10 * (delta + 1.0)
    if relaxation >= 1.0:
        warnings.warn(
            f"q10*(delta+1) = {relaxation:.6g} >= 1: every codeword passes trivially",
            RuntimeWarning,
            stacklevel=2,
        )
    y_bits = np.asarray(y_bits, dtype=np.uint8)
    if y_bits.shape[0] != codebook.code_len:
        raise ValueError(f"result vector length {y_bits.shape[0]} != {codebook.code_len}")

    words = codebook.words.astype(np.int64)
    ones = words.sum(axis=1)
    matched = words @ y_bits.astype(np.int64)
    thresholds = ones * (1.0 - relaxation)
    zero_support = ones == 0
    passed = (matched >= thresholds) & ~zero_support
    return DecodeDecision(
        accepted=np.flatnonzero(passed),
        ones_count=ones,
        matched_count=matched,
        thresholds=thresholds,
        zero_support=zero_support,
    )


def score_round(truth: TransmissionRound, decision: DecodeDecision):
    """Set-based scoring over codeword indices.

    miss: some transmitted index is absent from the accepted set.
    false alarm: some accepted index was not transmitted.  A duplicate bit
    pattern under a different index therefore counts as a false alarm.
    """
    sent = set(int(j) for j in np.asarray(truth.chosen_words))
    got = set(int(j) for j in decision.accepted)
    miss = not sent <= got
    false_alarm = not got <= sent
    return miss, false_alarm
