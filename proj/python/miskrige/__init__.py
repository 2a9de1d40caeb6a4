"""Kriging under kernel misspecification: a thin layer over the C++ core."""

import csv
import io
import json

import numpy as np

from ._core import (
    Error,
    FactorizationFailed,
    NumericalBreakdown,
    NumericalError,
    ValidationError,
    min_eigenvalue,
)
from . import _core

__all__ = [
    "Error",
    "FactorizationFailed",
    "Model",
    "NumericalBreakdown",
    "NumericalError",
    "ValidationError",
    "design",
    "fit_rate",
    "kernel_matrix",
    "min_eigenvalue",
    "run_study",
]


def _column(x):
    a = np.asarray(x, dtype=float)
    return a.reshape(-1, 1) if a.ndim <= 1 else a


def design(kind, n, seed=1, lo=0.0, hi=1.0):
    """Design points on (lo, hi) with fill distance h, separation q and ratio rho."""
    points, h, q, rho = _core.design(kind, n, seed, lo, hi)
    return {"points": points[:, 0], "h": h, "q": q, "rho": rho}


def kernel_matrix(kernel, xs, ys=None):
    """[k(x_i, y_j)] for a kernel spec dict such as {"family": "matern", "nu": 1.5}."""
    xs = _column(xs)
    return _core.kernel_matrix(json.dumps(kernel), xs, xs if ys is None else _column(ys))


def fit_rate(ns, errors):
    return json.loads(_core.fit_rate(list(map(float, ns)), list(map(float, errors))))


def run_study(config):
    """Runs a study config dict; returns (summary dict, list of row dicts)."""
    summary, rows = _core.run_study(json.dumps(config))
    table = [{k: float(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(rows))]
    return json.loads(summary), table


class Model:
    """Kriging fit with predictive mean and variance."""

    def __init__(self, kernel, xs, y, nugget=0.0, lo=0.0, hi=1.0):
        self._model = _core.Model(json.dumps(kernel), _column(xs), np.asarray(y, dtype=float),
                                  nugget, lo, hi)

    def mean(self, xs):
        return self._model.mean(_column(xs))

    def variance(self, xs):
        return self._model.variance(_column(xs))

    @property
    def coefficients(self):
        return self._model.coefficients

    @property
    def residual(self):
        return self._model.residual

    @property
    def rkhs_norm_sq(self):
        return self._model.rkhs_norm_sq
