"""Bundled example data.

``synthetic_survival.csv`` is a fixed draw from :mod:`censout.simulate`
(``SimConfig(n_clean=120, n_outlier=6, c=6.0, censor_upper=40.0, seed=0)``,
replicate 0) with the log-scale responses exponentiated back to raw times, so
the documented walkthrough runs end to end on data shipped with the package.
The last six rows are the planted upper outliers.  Pass ``--log-time`` (or
call ``log_transform``) before fitting, mirroring how survival times are
usually analyzed on the log scale.
"""

from __future__ import annotations

from importlib import resources

SYNTHETIC_NAME = "synthetic_survival.csv"


def synthetic_survival_path():
    """Filesystem path of the bundled synthetic dataset."""
    return resources.files(__package__).joinpath(SYNTHETIC_NAME)
