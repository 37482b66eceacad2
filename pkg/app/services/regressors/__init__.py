"""From-scratch regressors behind a common fit/predict interface.

Importing the package registers every estimator kind.
"""

from app.services.regressors import ensembles, mlp, ridge  # noqa: F401
from app.services.regressors.base import (
    BaseRegressor,
    fit,
    predict,
    regressor_class,
)

__all__ = ["BaseRegressor", "fit", "predict", "regressor_class"]
