"""Validated system parameters shared by every stage of the pipeline.

All arithmetic inside the package is done in linear units (watts); decibels
appear only at the CLI boundary via :func:`db_to_linear` / :func:`linear_to_db`.
``power`` and ``noise`` are the source of truth; ``snr`` is a cached ratio
recomputed by :func:`validate`.
"""

import math
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class SystemParams:
    """Scalar model parameters. Immutable once validated, safe to share across workers."""

    n_users: int = 16          # total user population
    msgs_per_user: int = 2     # codebook size per user
    k_active: int = 2          # simultaneously active users
    m_tx: int = 32             # transmit antennas per user
    m_rx: int = 32             # receive antennas (analysis assumes m_tx == m_rx)
    power: float = 1.0         # per-user transmit power, linear watts
    noise: float = 0.1         # noise power, linear watts
    bernoulli_p: float = 0.25  # codeword bit probability of '1'
    threshold_gamma: float = 1.0  # normalized energy-detection threshold
    relax_delta: float = 1.0   # decoder relaxation parameter
    margin_delta: float = 0.5  # error-exponent margin
    seed: int = 0              # master PRNG seed (64-bit unsigned)
    snr: float | None = None   # power/noise, derived; filled in by validate()

    @property
    def n_codewords(self) -> int:
        return self.n_users * self.msgs_per_user


def validate(params: SystemParams) -> SystemParams:
    """Check every invariant and return a copy with ``snr`` recomputed.

    Idempotent: validating a validated instance returns an equal instance.
    ``m_tx != m_rx`` is allowed but lies outside the analyzed regime; the
    closed-form results assume square antenna counts.
    """
    for name in ("n_users", "msgs_per_user", "k_active", "m_tx", "m_rx"):
        value = getattr(params, name)
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
    if params.k_active > params.n_users:
        raise ValueError(
            f"K exceeds N: k_active={params.k_active} > n_users={params.n_users}"
        )
    if not params.power > 0:
        raise ValueError(f"power must be positive, got {params.power!r}")
    if not params.noise > 0:
        raise ValueError(f"noise must be positive, got {params.noise!r}")
    if not 0.0 < params.bernoulli_p < 1.0:
        raise ValueError(f"bernoulli_p must lie in (0, 1), got {params.bernoulli_p!r}")
    if params.threshold_gamma < 0:
        raise ValueError(f"threshold_gamma must be >= 0, got {params.threshold_gamma!r}")
    if not params.relax_delta > 0:
        raise ValueError(f"relax_delta must be positive, got {params.relax_delta!r}")
    if params.margin_delta < 0:
        raise ValueError(f"margin_delta must be >= 0, got {params.margin_delta!r}")
    if not isinstance(params.seed, int) or not 0 <= params.seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {params.seed!r}")
    # power and noise are the source of truth; any cached ratio is overwritten
    return replace(params, snr=params.power / params.noise)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        raise ValueError(f"cannot convert non-positive value {value!r} to dB")
    return 10.0 * math.log10(value)


# Config files are plain text, one `key=value` per line; `#` starts a comment.
# Every SystemParams field is a valid key.  `snr` may be given but must agree
# with power/noise.  If `m_rx` is set and `m_tx` is not, `m_tx` follows it.
_FIELD_TYPES = {f.name: f.type for f in fields(SystemParams)}
_INT_KEYS = {"n_users", "msgs_per_user", "k_active", "m_tx", "m_rx", "seed"}


def parse_config_text(text: str, base: SystemParams | None = None) -> SystemParams:
    """Parse `key=value` config text into a validated SystemParams."""
    base = base if base is not None else SystemParams()
    updates: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in updates:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            updates[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    if "m_rx" in updates and "m_tx" not in updates:
        updates["m_tx"] = updates["m_rx"]
    given_snr = updates.pop("snr", None)
    built = validate(replace(base, **updates))
    if given_snr is not None and not math.isclose(given_snr, built.snr, rel_tol=1e-12):
        raise ValueError(
            f"snr={given_snr!r} conflicts with power/noise={built.snr!r}; "
            "power and noise are the source of truth"
        )
    return built


def load_config(path, base: SystemParams | None = None) -> SystemParams:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)


def config_text(params: SystemParams) -> str:
    """Render parameters back to the config-file format (derived snr omitted)."""
    lines = []
    for f in fields(SystemParams):
        if f.name == "snr":
            continue
        lines.append(f"{f.name}={getattr(params, f.name)}")
    return "\n".join(lines) + "\n"
