"""Scikit-learn compatible front end for bagged projected nearest neighbours."""

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from ._rng import DEFAULT_SEED
from .ensemble import HyperParams, aggregate, fit_models, oob_accuracy
from .exceptions import NoOOBPoints, ProjectionDisabled
from .linalg import pca_basis
from .subspace import ensemble_projection, importance_contribution


def default_subset_size(d):
    return max(1, math.floor(0.75 * d))


def default_n_components(q0):
    return max(1, math.ceil(0.5 * q0))


class BOPNNClassifier(ClassifierMixin, BaseEstimator):
    """Bag of projected nearest neighbours.

    Each of ``n_estimators`` base models draws ``floor(bag_fraction * n)``
    training points without replacement and ``subset_size`` covariates at
    random, finds the leading directions that spread points away from their
    other-class neighbours relative to their same-class neighbours, and votes
    with kNN inside that subspace. Predictions average the base-model class
    proportions.

    Parameters
    ----------
    n_neighbors : int, default=3
        Neighbour rank used both for the scatter matrices and for voting.
    subset_size : int or None, default=None
        Covariates per model. ``None`` means ``floor(0.75 * n_features)``.
    n_components : int or None, default=None
        Discriminant directions kept per model. ``None`` means
        ``ceil(0.5 * subset_size)``. Ignored when ``projection=False``.
    n_estimators : int, default=100
    bag_fraction : float, default=0.63
        Fraction of the training set in each bag, in (0, 1].
    projection : bool, default=True
        When False, base models vote on the raw covariate subset.
    balanced : bool, default=False
        Give every class equal weight in the scatter matrices.
    random_state : int or None, default=None
        Seed of the portable generator; ``None`` uses a fixed constant so
        fits are always reproducible.
    n_jobs : int, default=1
        Threads used to fit base models. Results do not depend on it.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    estimators_ : list of BaseModel
    hyperparams_ : HyperParams
        Fully resolved settings used by the fit.
    oob_score_ : float or None
        Out-of-bag accuracy; None when no point was ever left out.
    """

    def __init__(
        self,
        n_neighbors=3,
        subset_size=None,
        n_components=None,
        n_estimators=100,
        bag_fraction=0.63,
        projection=True,
        balanced=False,
        random_state=None,
        n_jobs=1,
    ):
        self.n_neighbors = n_neighbors
        self.subset_size = subset_size
        self.n_components = n_components
        self.n_estimators = n_estimators
        self.bag_fraction = bag_fraction
        self.projection = projection
        self.balanced = balanced
        self.random_state = random_state
        self.n_jobs = n_jobs

    def resolve_hyperparams(self, n_features):
        q0 = self.subset_size if self.subset_size is not None else default_subset_size(n_features)
        if not self.projection:
            q = q0
        elif self.n_components is not None:
            q = self.n_components
        else:
            q = default_n_components(q0)
        seed = DEFAULT_SEED if self.random_state is None else int(self.random_state)
        return HyperParams(
            k=int(self.n_neighbors),
            q0=int(q0),
            q=int(q),
            B=int(self.n_estimators),
            pi_b=float(self.bag_fraction),
            projection=bool(self.projection),
            balanced=bool(self.balanced),
            seed=seed,
        ).validate(n_features)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.hyperparams_ = self.resolve_hyperparams(X.shape[1])
        self._fit_X = np.ascontiguousarray(X)
        self._fit_y = codes.astype(np.int64)
        self.estimators_ = fit_models(self._fit_X, self._fit_y, self.hyperparams_, self.n_jobs)
        self.oob_score_ = self._oob()
        return self

    def _oob(self):
        try:
            return oob_accuracy(
                self.estimators_, self._fit_X, self._fit_y, self.hyperparams_.k, len(self.classes_)
            )
        except NoOOBPoints:
            return None

    def _check_input(self, X):
        check_is_fitted(self, "estimators_")
        return validate_data(self, X, dtype=np.float64, reset=False)

    def predict_proba(self, X):
        X = self._check_input(X)
        return aggregate(self.estimators_, X, self.hyperparams_.k, len(self.classes_))

    def predict(self, X):
        # argmax returns the first maximum, i.e. the smallest label on ties.
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def _bases(self):
        check_is_fitted(self, "estimators_")
        if not self.hyperparams_.projection:
            raise ProjectionDisabled("model was fitted without discriminant projection")
        return [m.discriminant for m in self.estimators_]

    @property
    def feature_importances_(self):
        """Mean eigenvalue-weighted squared loading of each covariate across models."""
        bases = self._bases()
        d = self.n_features_in_
        return sum(importance_contribution(db, d) for db in bases) / len(bases)

    @property
    def ensemble_projection_(self):
        return ensemble_projection(self._bases(), self.n_features_in_)

    def project(self, X, view_dims=2):
        """Coordinates of ``P X`` on its leading principal directions.

        ``P`` is the ensemble-averaged projection onto the model subspaces; the
        principal directions are computed from the projected rows of ``X``.
        """
        P = self.ensemble_projection_
        X = self._check_input(X)
        projected = X @ P
        pcs = pca_basis(projected, view_dims)
        return (projected - projected.mean(axis=0)) @ pcs.vectors


def project_for_view(estimator, X, view_dims=2):
    return estimator.project(X, view_dims)


def variable_importance(estimator):
    return estimator.feature_importances_


def check_features(X):
    return check_array(X, dtype=np.float64)
