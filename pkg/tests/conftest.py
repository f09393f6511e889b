import pytest

from mimo_gt import analysis
from mimo_gt.params import SystemParams, validate


@pytest.fixture(scope="session")
def desk_params() -> SystemParams:
    """Desk-scale configuration: N=16, M=2, K=2, rho=10, margin 0.5."""
    return validate(SystemParams(
        n_users=16, msgs_per_user=2, k_active=2,
        power=1.0, noise=0.1, margin_delta=0.5, seed=20240817,
    ))


@pytest.fixture(scope="session")
def desk_optimum(desk_params):
    return analysis.optimize_beta_star(desk_params.k_active, desk_params.snr)
