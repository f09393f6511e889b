import numpy as np
import pytest
from scipy import stats

from mimo_gt.params import SystemParams, validate
from mimo_gt.phy import (
    Codebook,
    NumericalRankFailure,
    ZeroCodewordError,
    boolean_sum,
    draw_round,
    energy_detect,
    format_round_record,
    generate_codebook,
    parse_round_record,
    rzf_beamform,
    sample_channel,
    transmit_round,
)


def _params(**kw):
    base = dict(n_users=8, msgs_per_user=2, k_active=2, m_rx=16, m_tx=16,
                power=1.0, noise=0.1, bernoulli_p=0.5, seed=5)
    base.update(kw)
    return validate(SystemParams(**base))


def _random_channel(rng, m):
    return (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)


class TestCodebook:
    def test_high_p_ones_count(self):
        p = _params(bernoulli_p=0.999, m_rx=64, m_tx=64, n_users=500, msgs_per_user=2)
        book = generate_codebook(p, np.random.default_rng(0))
        assert book.words.mean() * 64 == pytest.approx(63.936, abs=0.05)

    def test_bit_fraction_half(self):
        p = _params(n_users=100, msgs_per_user=10, m_rx=100, m_tx=100)
        book = generate_codebook(p, np.random.default_rng(1))
        assert book.words.mean() == pytest.approx(0.5, abs=0.005)

    def test_deterministic_for_seed(self):
        p = _params()
        a = generate_codebook(p, np.random.default_rng(42))
        b = generate_codebook(p, np.random.default_rng(42))
        assert np.array_equal(a.words, b.words)

    def test_index_maps(self):
        p = _params(n_users=3, msgs_per_user=4)
        book = generate_codebook(p, np.random.default_rng(2))
        assert book.n_words == 12
        j = book.word_index(user=2, msg=3)
        assert j == 11
        assert book.user_of(j) == 2 and book.msg_of(j) == 3
        assert np.array_equal(book.support(j), np.flatnonzero(book.words[j]))


class TestChannel:
    def test_entry_second_moment(self):
        p = _params(m_rx=100, m_tx=100)
        rng = np.random.default_rng(3)
        pooled = np.concatenate([sample_channel(p, rng).ravel() for _ in range(100)])
        assert np.mean(np.abs(pooled) ** 2) == pytest.approx(1.0, abs=0.01)
        assert abs(pooled.real.mean()) < 0.005

    def test_consecutive_draws_uncorrelated(self):
        p = _params(m_rx=100, m_tx=100)
        rng = np.random.default_rng(4)
        cross = []
        for _ in range(100):
            h1 = sample_channel(p, rng).ravel()
            h2 = sample_channel(p, rng).ravel()
            cross.append(np.mean(h1 * h2.conj()))
        assert abs(np.mean(cross)) < 0.01


class TestRzfBeamform:
    def test_all_ones_word(self):
        rng = np.random.default_rng(5)
        h = _random_channel(rng, 4)
        x = rzf_beamform(h, np.ones(4, dtype=np.uint8), power=2.0)
        assert np.allclose(x, np.sqrt(2.0) * np.ones(4) / 2.0, atol=1e-12)

    def test_power_constraint(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            m = int(rng.integers(3, 12))
            word = (rng.random(m) < 0.5).astype(np.uint8)
            if not word.any():
                word[0] = 1
            x = rzf_beamform(_random_channel(rng, m), word, power=3.0)
            assert np.linalg.norm(x) ** 2 == pytest.approx(3.0, rel=1e-10)

    def test_nulls_zero_indexed_antennas(self):
        rng = np.random.default_rng(7)
        h = _random_channel(rng, 4)
        word = np.array([1, 0, 1, 0], dtype=np.uint8)
        x = rzf_beamform(h, word, power=1.0)
        for row in (1, 3):
            assert np.abs(h[row] @ x) ** 2 <= 1e-18

    def test_direction_lies_in_nullspace(self):
        from mimo_gt.linalg import nullspace_orthonormal_basis

        rng = np.random.default_rng(8)
        h = _random_channel(rng, 8)
        word = np.array([1, 1, 0, 0, 1, 0, 0, 1], dtype=np.uint8)
        x = rzf_beamform(h, word, power=1.0)
        basis = nullspace_orthonormal_basis(h[np.flatnonzero(word == 0)])
        projected = basis @ (basis.conj().T @ x)
        assert np.linalg.norm(projected - x) <= 1e-10

    def test_all_zero_word_raises(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ZeroCodewordError):
            rzf_beamform(_random_channel(rng, 4), np.zeros(4, dtype=np.uint8), 1.0)

    def test_overconstrained_raises_rank_failure(self):
        rng = np.random.default_rng(10)
        h = (rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))) / np.sqrt(2)
        with pytest.raises(NumericalRankFailure):
            rzf_beamform(h, np.array([1, 0, 0, 0], dtype=np.uint8), 1.0)

    def test_word_length_mismatch(self):
        rng = np.random.default_rng(11)
        with pytest.raises(ValueError):
            rzf_beamform(_random_channel(rng, 4), np.ones(5, dtype=np.uint8), 1.0)


class TestTransmitRound:
    def test_empty_active_set_gives_pure_noise(self):
        p = _params(noise=0.5, m_rx=64, m_tx=64)
        book = generate_codebook(p, np.random.default_rng(12))
        energies = []
        rng = np.random.default_rng(13)
        for _ in range(200):
            round_ = transmit_round(p, book, np.array([], dtype=int), np.array([], dtype=int), rng)
            energies.append(np.abs(round_.received) ** 2)
        energies = np.concatenate(energies)
        assert energies.mean() == pytest.approx(0.5, rel=0.03)
        assert stats.kstest(energies, "expon", args=(0.0, 0.5)).pvalue > 0.01

    def test_single_user_nulls_zero_support(self):
        p = _params(k_active=1, noise=1e-40)
        book = generate_codebook(p, np.random.default_rng(14))
        rng = np.random.default_rng(15)
        active, chosen = draw_round(p, book, rng)
        round_ = transmit_round(p, book, active, chosen, rng)
        word = book.words[chosen[0]]
        off = np.abs(round_.received[word == 0]) ** 2
        assert off.max() <= 1e-18 * p.power

    def test_disjoint_supports_superpose(self):
        words = np.zeros((2, 8), dtype=np.uint8)
        words[0, :3] = 1
        words[1, 4:6] = 1
        book = Codebook(n_users=2, msgs_per_user=1, words=words)
        p = _params(n_users=2, msgs_per_user=1, k_active=2, m_rx=8, m_tx=8, noise=1e-40)
        rng = np.random.default_rng(16)
        round_ = transmit_round(p, book, np.array([0, 1]), np.array([0, 1]), rng)
        union = boolean_sum(book, [0, 1]).astype(bool)
        energy = np.abs(round_.received) ** 2
        assert energy[~union].max() <= 1e-18 * p.power
        assert energy[union].min() > 1e-18 * p.power

    def test_word_ownership_enforced(self):
        p = _params()
        book = generate_codebook(p, np.random.default_rng(17))
        with pytest.raises(ValueError, match="belong"):
            transmit_round(p, book, np.array([0, 1]), np.array([0, 1]), np.random.default_rng(0))

    def test_zero_codeword_user_is_silent(self):
        words = np.zeros((2, 6), dtype=np.uint8)
        words[1, :2] = 1
        book = Codebook(n_users=2, msgs_per_user=1, words=words)
        p = _params(n_users=2, msgs_per_user=1, k_active=2, m_rx=6, m_tx=6, noise=1e-40)
        round_ = transmit_round(p, book, np.array([0, 1]), np.array([0, 1]),
                                np.random.default_rng(18))
        assert round_.zero_codeword_words == (0,)
        energy = np.abs(round_.received) ** 2
        assert energy[2:].max() <= 1e-18 * p.power

    def test_boolean_sum_in_noise_free_regime(self):
        # channel noise far below the detector's nominal floor of 1e-12 * P;
        # with gamma = 1 the detected vector is the OR of the sent words
        p = _params(k_active=2, noise=1e-40)
        rng = np.random.default_rng(19)
        detector_noise = 1e-12 * p.power
        hits = 0
        rounds = 10_000
        for _ in range(rounds):
            book = generate_codebook(p, rng)
            active, chosen = draw_round(p, book, rng)
            round_ = transmit_round(p, book, active, chosen, rng)
            bits = energy_detect(round_.received, detector_noise, 1.0)
            hits += bool(np.array_equal(bits, boolean_sum(book, chosen)))
        assert hits / rounds >= 0.999


class TestEnergyDetect:
    def test_zero_vector(self):
        assert not energy_detect(np.zeros(5, dtype=complex), 1.0, 1.0).any()

    def test_gamma_zero_marks_any_energy(self):
        y = np.array([0.0, 1e-8, 3.0], dtype=complex)
        assert energy_detect(y, 1.0, 0.0).tolist() == [0, 1, 1]

    def test_boundary_goes_to_zero(self):
        noise, gamma = 0.5, 2.0
        y = np.array([np.sqrt(noise * gamma), 2.0], dtype=complex)
        assert energy_detect(y, noise, gamma).tolist() == [0, 1]

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            energy_detect(np.zeros(2, dtype=complex), 0.0, 1.0)
        with pytest.raises(ValueError):
            energy_detect(np.zeros(2, dtype=complex), 1.0, -1.0)


class TestRoundDump:
    def test_record_roundtrip(self):
        active = np.array([3, 7])
        words = np.array([6, 15])
        bits = np.array([1, 0, 1, 1, 0, 0, 0, 1, 1, 0], dtype=np.uint8)
        line = format_round_record(active, words, bits)
        a, w, b = parse_round_record(line, code_len=10)
        assert np.array_equal(a, active)
        assert np.array_equal(w, words)
        assert np.array_equal(b, bits)

    def test_empty_round_roundtrip(self):
        line = format_round_record(np.array([], dtype=int), np.array([], dtype=int),
                                   np.zeros(4, dtype=np.uint8))
        a, w, b = parse_round_record(line, code_len=4)
        assert a.size == 0 and w.size == 0 and not b.any()

    def test_file_roundtrip(self, tmp_path):
        from mimo_gt.phy import load_round_dump, save_round_dump

        records = [
            (np.array([1]), np.array([2]), np.array([1, 0, 1], dtype=np.uint8)),
            (np.array([0, 2]), np.array([0, 4]), np.array([0, 1, 1], dtype=np.uint8)),
        ]
        path = tmp_path / "rounds.txt"
        save_round_dump(path, records)
        loaded = load_round_dump(path, code_len=3)
        assert len(loaded) == 2
        for (a, w, b), (a2, w2, b2) in zip(records, loaded):
            assert np.array_equal(a, a2) and np.array_equal(w, w2) and np.array_equal(b, b2)
