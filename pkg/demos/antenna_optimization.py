#!/usr/bin/env python3
"""Antenna-scaling optimization across the SNR range.

For each SNR the solver picks the codeword density p, the detection
threshold gamma, and the decoder relaxation that minimize the scaling
constant beta in the antenna budget M_r = (1 + delta) beta K ln(N*M).
beta* explodes as the SNR vanishes (energy detection starves) and flattens
to a constant at high SNR.
"""

import math

from mimo_gt import analysis

N_USERS, MSGS, K, MARGIN = 16, 2, 2, 0.5

print(f"N={N_USERS}, M={MSGS}, K={K}, margin delta={MARGIN}\n")
print(f"{'rho':>10} {'p*':>8} {'gamma*':>8} {'Delta*':>8} {'beta*':>12} {'M_r':>6}")
for rho in (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 1e6):
    res = analysis.optimize_beta_star(K, rho)
    m_r = analysis.required_antennas(N_USERS, MSGS, K, MARGIN, res.beta_star)
    print(f"{rho:>10g} {res.p_star:>8.4f} {res.gamma_star:>8.4f} "
          f"{res.delta_star:>8.4f} {res.beta_star:>12.4f} {m_r:>6}")

res = analysis.optimize_beta_star(K, 10.0)
print("\nSolution structure at rho=10:")
print(f"  alpha* = K p* = {res.alpha_star:.6f} (always <= e-1 = {math.e - 1:.6f})")
print(f"  stationarity |f'(gamma*)| = {abs(res.residuals['fprime']):.2e}, "
      f"curvature f'' = {res.residuals['fsecond']:.4f} > 0")
print(f"  relaxation Delta* equalizes both error exponents "
      f"(relative gap {res.residuals['beta_equalizer_rel']:.2e})")
