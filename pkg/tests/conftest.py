"""Shared fixtures: the reference parameter set used across test modules."""

import pytest

from accumark.marks import GammaMixture, ModelParams


@pytest.fixture
def base_mix() -> GammaMixture:
    return GammaMixture(weights=(0.6, 0.4), shapes=(2.0, 6.0),
                        rates=(4.0, 2.5))


@pytest.fixture
def base_model() -> ModelParams:
    return ModelParams(kappa=8.0, lambda_bar=2.0, beta=1.0, r=0.02,
                       T=150.0 / 365.0, lambda0=2.5, u0=0.0)
