"""Shared fixtures and small builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from censout.data import IDENTITY, Dataset, scale_covariates
from censout.solver import QuantileFit


def make_dataset(
    times,
    status=None,
    x=None,
    transform=IDENTITY,
    scaled_unit=False,
):
    """Build a Dataset from plain arrays.

    ``x`` may be None (intercept-only), a vector, or an (n, p) block.  With
    ``scaled_unit`` the covariates are taken to already live in [0, 1] and are
    stamped with identity scaling bounds (0, 1) so kernel code accepts them.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    if status is None:
        status = np.ones(n, dtype=np.int8)
    if x is None:
        cov = np.zeros((n, 0))
        names = ()
    else:
        cov = np.asarray(x, dtype=float)
        if cov.ndim == 1:
            cov = cov.reshape(-1, 1)
        names = tuple(f"x{j + 1}" for j in range(cov.shape[1]))
    d = Dataset(
        times=times,
        status=np.asarray(status, dtype=np.int8),
        covariates=cov,
        covariate_names=names,
        response_transform=transform,
    )
    if scaled_unit and d.p:
        d = scale_covariates(d, bounds=((0.0, 1.0),) * d.p)
    return d


def manual_fit(tau, beta):
    """QuantileFit with hand-picked coefficients (original covariate scale)."""
    return QuantileFit(
        tau=float(tau),
        beta=np.asarray(beta, dtype=float),
        objective=0.0,
        pseudo_value=None,
        diagnostics={},
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
