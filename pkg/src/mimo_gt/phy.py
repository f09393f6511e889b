"""Physical-layer pipeline: codebook, fading channel, zero-forcing transmitter,
multi-user superposition, and energy detection.

One round: each active user beamforms its codeword so that receive antennas
indexed by the word's zeros see no energy, the channel superposes all users
plus noise, and the receiver hard-decides each antenna energy against
``noise * gamma``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .linalg import DEFAULT_RANK_TOL, nullspace_orthonormal_basis, sample_cgrv
from .params import SystemParams


class ZeroCodewordError(ValueError):
    """Raised when asked to beamform an all-zero codeword (nothing to energize)."""


class NumericalRankFailure(RuntimeError):
    """Raised when a nonzero codeword leaves an empty nullspace to transmit from."""


@dataclass(frozen=True)
class Codebook:
    """N*M binary codewords of length ``code_len``, M per user, in user order."""

    n_users: int
    msgs_per_user: int
    words: np.ndarray  # shape (n_users * msgs_per_user, code_len), uint8

    @property
    def n_words(self) -> int:
        return self.words.shape[0]

    @property
    def code_len(self) -> int:
        return self.words.shape[1]

    def user_of(self, word_index: int) -> int:
        return word_index // self.msgs_per_user

    def msg_of(self, word_index: int) -> int:
        return word_index % self.msgs_per_user

    def word_index(self, user: int, msg: int) -> int:
        return user * self.msgs_per_user + msg

    def support(self, word_index: int) -> np.ndarray:
        """Indices of the ones in one codeword."""
        return np.flatnonzero(self.words[word_index])


def generate_codebook(params: SystemParams, rng: np.random.Generator) -> Codebook:
    """Draw all N*M codewords with i.i.d. Bernoulli(p) bits."""
    shape = (params.n_codewords, params.m_rx)
    words = (rng.random(shape) < params.bernoulli_p).astype(np.uint8)
    return Codebook(params.n_users, params.msgs_per_user, words)


def sample_channel(params: SystemParams, rng: np.random.Generator) -> np.ndarray:
    """One user's m_rx-by-m_tx channel with i.i.d. unit-variance complex Gaussian entries."""
    return sample_cgrv(rng, 1.0, (params.m_rx, params.m_tx))


def _project_onto_nullspace(a: np.ndarray, probe: np.ndarray):
    """Orthogonal projection of ``probe`` onto the right-nullspace of ``a``.

    Uses the Gram matrix of the constraint rows (Cholesky + two triangular
    solves, applied twice for refinement).  Returns None when the constraints
    are numerically rank-deficient, so the caller can fall back to an SVD.
    """
    ah = a.conj().T
    gram = a @ ah
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return None

    def reject(vec):
        u = solve_triangular(chol, a @ vec, lower=True, check_finite=False)
        u = solve_triangular(chol.conj().T, u, lower=False, check_finite=False)
        return vec - ah @ u

    return reject(reject(probe.astype(complex)))


def rzf_beamform(
    h: np.ndarray,
    word: np.ndarray,
    power: float,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> np.ndarray:
    """Randomized zero-forcing: transmit from the nullspace of the zero-indexed rows.

    Collect the rows of ``h`` where ``word`` is 0 and pick a deterministic
    vector from their common nullspace: the all-ones probe projected onto it
    (equal to the summed identity basis when nothing is constrained).  The
    result is scaled so that ``||x||^2 == power``.  Degenerate constraint sets
    fall back to summing the orthonormal SVD basis of the nullspace.
    """
    word = np.asarray(word)
    if word.shape[0] != h.shape[0]:
        raise ValueError(f"word length {word.shape[0]} != m_rx {h.shape[0]}")
    ones = np.flatnonzero(word)
    if ones.size == 0:
        raise ZeroCodewordError("all-zero codeword cannot be energized; transmit nothing")
    zeros = np.flatnonzero(word == 0)
    m_t = h.shape[1]
    probe = np.ones(m_t)
    if zeros.size == 0:
        v = probe.astype(complex)
    else:
        a = h[zeros, :]
        v = _project_onto_nullspace(a, probe)
        scale = np.linalg.norm(a) * math.sqrt(m_t)
        if (
            v is None
            or np.linalg.norm(v) <= 1e-8 * math.sqrt(m_t)
            or np.abs(a @ v).max() > rank_tol * max(scale, 1.0)
        ):
            basis = nullspace_orthonormal_basis(a, rank_tol)
            if basis.shape[1] == 0:
                raise NumericalRankFailure(
                    f"no nullspace left: {zeros.size} constraints on {m_t} antennas"
                )
            v = basis.sum(axis=1)
    return np.sqrt(power) * v / np.linalg.norm(v)


@dataclass(frozen=True)
class TransmissionRound:
    """Ground truth and received signal for one transmission round."""

    active_set: np.ndarray      # K distinct user indices
    chosen_words: np.ndarray    # K codeword indices, chosen_words[i] owned by active_set[i]
    channels: list              # K channel matrices, aligned with active_set
    received: np.ndarray        # length m_rx complex vector
    zero_codeword_words: tuple = field(default=())  # word indices that transmitted nothing


def draw_round(params: SystemParams, codebook: Codebook, rng: np.random.Generator):
    """Uniform active set without replacement and one uniform word per active user."""
    active = rng.choice(params.n_users, size=params.k_active, replace=False)
    msgs = rng.integers(0, params.msgs_per_user, size=params.k_active)
    words = active * params.msgs_per_user + msgs
    return active, words


def transmit_round(
    params: SystemParams,
    codebook: Codebook,
    active_set: np.ndarray,
    chosen_words: np.ndarray,
    rng: np.random.Generator,
) -> TransmissionRound:
    """Superpose every active user's beamformed signal and add receiver noise.

    Channels are freshly drawn per round (block fading).  A user that drew an
    all-zero codeword stays silent and is recorded for scoring.  The number of
    transmitters is taken from ``active_set``; production rounds come from
    :func:`draw_round` with exactly ``k_active`` users, while an empty set
    gives a pure-noise round.
    """
    active_set = np.asarray(active_set, dtype=int)
    chosen_words = np.asarray(chosen_words, dtype=int)
    if active_set.size != chosen_words.size:
        raise ValueError("active_set and chosen_words must have equal length")
    if len(set(active_set.tolist())) != active_set.size:
        raise ValueError("active users must be distinct")
    for user, j in zip(active_set, chosen_words):
        if codebook.user_of(int(j)) != int(user):
            raise ValueError(f"word {j} does not belong to user {user}")

    y = np.zeros(params.m_rx, dtype=complex)
    channels = []
    silent = []
    for j in chosen_words:
        h = sample_channel(params, rng)
        channels.append(h)
        word = codebook.words[int(j)]
        try:
            x = rzf_beamform(h, word, params.power)
        except ZeroCodewordError:
            silent.append(int(j))
            continue
        y += h @ x
    y += sample_cgrv(rng, params.noise, params.m_rx)
    return TransmissionRound(active_set, chosen_words, channels, y, tuple(silent))


def energy_detect(y: np.ndarray, noise: float, gamma: float) -> np.ndarray:
    """Hard decision per antenna: 1 iff |y_i|^2 strictly exceeds noise*gamma."""
    if noise <= 0:
        raise ValueError(f"noise must be positive, got {noise!r}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    energy = np.abs(np.asarray(y)) ** 2
    return (energy > noise * gamma).astype(np.uint8)


def boolean_sum(codebook: Codebook, chosen_words) -> np.ndarray:
    """Bitwise OR of the chosen codewords: the ideal noise-free result vector."""
    out = np.zeros(codebook.code_len, dtype=np.uint8)
    for j in np.asarray(chosen_words):
        out |= codebook.words[int(j)]
    return out


# Round-dump format, one line per round, for offline decoder debugging:
#   active=<csv ints> words=<csv ints> y=<hex of detected bits, MSB-first>

def format_round_record(active_set, chosen_words, detected_bits) -> str:
    bits = np.asarray(detected_bits, dtype=np.uint8)
    packed = np.packbits(bits)
    active = ",".join(str(int(u)) for u in np.asarray(active_set))
    words = ",".join(str(int(j)) for j in np.asarray(chosen_words))
    return f"active={active} words={words} y=0x{packed.tobytes().hex()}"


def parse_round_record(line: str, code_len: int):
    """Inverse of :func:`format_round_record`; returns (active, words, bits)."""
    parts = dict(item.split("=", 1) for item in line.strip().split())
    active = np.array([int(v) for v in parts["active"].split(",") if v], dtype=int)
    words = np.array([int(v) for v in parts["words"].split(",") if v], dtype=int)
    payload = bytes.fromhex(parts["y"][2:])
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[:code_len]
    return active, words, bits.astype(np.uint8)


def save_round_dump(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for active, words, bits in records:
            fh.write(format_round_record(active, words, bits) + "\n")


def load_round_dump(path, code_len: int):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(parse_round_record(line, code_len))
    return out
