"""Group-testing massive MU-MIMO: link-level simulator and closed-form analysis.

Modules
-------
params      validated system configuration and config-file parsing
linalg      complex Gaussian sampling and nullspace bases
phy         codebook, channel, zero-forcing transmitter, energy detection
decoder     noisy column-matching decoder and round scoring
analysis    crossover probabilities, error bounds, antenna optimization,
            converse bound, rate ratios
montecarlo  reproducible estimators for crossover and error probabilities
cli         command-line front-end (``mimo-gt``)
"""

from . import analysis, decoder, linalg, montecarlo, params, phy

__all__ = ["analysis", "decoder", "linalg", "montecarlo", "params", "phy"]
__version__ = "0.1.0"
