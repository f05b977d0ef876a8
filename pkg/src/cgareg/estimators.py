"""Scikit-learn style estimators wrapping the registration pipelines.

``fit(X, y)`` estimates the rigid motion carrying the source cloud ``X`` onto
the target cloud ``y`` (no correspondences needed, clouds may be permuted);
``transform`` applies the estimated motion to points.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .registration import RegistrationConfig, register_cga_evd, register_vga_evd
from .validation import check_points


class _BaseRegistration(BaseEstimator, TransformerMixin):
    def __init__(self, eig_tol=1e-8, gap_tol=1e-6, ref_tol=1e-9, exact_translation=False):
        self.eig_tol = eig_tol
        self.gap_tol = gap_tol
        self.ref_tol = ref_tol
        self.exact_translation = exact_translation

    def _config(self) -> RegistrationConfig:
        return RegistrationConfig(
            eig_tol=self.eig_tol,
            gap_tol=self.gap_tol,
            ref_tol=self.ref_tol,
            exact_translation=self.exact_translation,
        )

    def _register(self, X, y):
        raise NotImplementedError

    def fit(self, X, y):
        """Estimate the motor aligning source points X with target points y."""
        X = check_points(X, "X", min_points=4)
        y = check_points(y, "y", min_points=4)
        self.result_ = self._register(X, y)
        self.motor_ = self.result_.motor
        self.rotation_ = self.motor_.rotation_matrix()
        self.translation_ = np.asarray(self.motor_.t)
        return self

    def _check_fitted(self):
        if not hasattr(self, "motor_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def transform(self, X):
        """Apply the estimated rigid motion to points."""
        self._check_fitted()
        return self.motor_.apply_points(check_points(X, "X"))

    def predict(self, X):
        return self.transform(X)


class CGAEVDRegistration(_BaseRegistration):
    """Correspondence-free registration via conformal spectral features.

    Parameters mirror :class:`cgareg.registration.RegistrationConfig`; fitted
    attributes are ``motor_``, ``rotation_`` (3x3), ``translation_`` (3,) and
    the full ``result_``.
    """

    def _register(self, X, y):
        return register_cga_evd(X, y, self._config())


class VGAEVDRegistration(_BaseRegistration):
    """PCA-style baseline registration (centroid + principal axes)."""

    def _register(self, X, y):
        return register_vga_evd(X, y, self._config())
