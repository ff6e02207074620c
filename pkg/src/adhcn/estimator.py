"""scikit-learn style wrapper around the dual-channel hypergraph classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .model import GraphOperators, forward, parse_strategy
from .training import TrainConfig, fit_params
from .validation import UNLABELED, check_features, check_hypergraph, check_index_set

__all__ = ["ADHCNClassifier"]


class ADHCNClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Transductive node classifier over a fixed hypergraph.

    Rows of ``X`` are the hypernodes of ``hypergraph``. Nodes whose label is
    ``-1`` are unlabeled, following :mod:`sklearn.semi_supervised`; they
    still take part in the convolutions. ``predict``, ``predict_proba`` and
    ``transform`` accept a feature matrix over the same nodes.

    Parameters
    ----------
    hypergraph : Hypergraph or list of lists of int
        Structure shared by all nodes.
    fusion : str, default="attention"
        One of ``attention``, ``attention-nocommon``, ``commconv``,
        ``fixed:<alpha>``, ``le-only`` or ``hg-only``.
    hidden : int, default=64
        Width of both channel outputs.
    learning_rate, weight_decay, dropout : float
        Adam step size, L2 coefficient on weight matrices, input dropout.
    max_epochs, patience : int
        Epoch budget and early-stopping patience on validation accuracy.
    random_state : int, default=0
        Seed for initialization and dropout.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    params_ : ModelParams
        Parameters from the selected epoch.
    train_report_ : TrainReport
    """

    def __init__(self, hypergraph=None, fusion="attention", hidden=64, learning_rate=1e-3,
                 weight_decay=5e-4, dropout=0.5, max_epochs=200, patience=50, random_state=0):
        self.hypergraph = hypergraph
        self.fusion = fusion
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.dropout = dropout
        self.max_epochs = max_epochs
        self.patience = patience
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            dropout=self.dropout,
            hidden=self.hidden,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=0 if self.random_state is None else int(self.random_state),
            fusion_strategy=self.fusion,
        )

    def fit(self, X, y, val_idx=None):
        """Fit on labeled nodes; ``val_idx`` (labeled) drives early stopping."""
        config = self._config()
        self.hypergraph_ = check_hypergraph(self.hypergraph)
        n = self.hypergraph_.num_nodes
        X = check_features(X, n)
        y = np.asarray(y).ravel()
        if y.shape[0] != n:
            raise ValueError(f"y has {y.shape[0]} entries but the hypergraph has {n} nodes")
        labeled = np.flatnonzero(y != UNLABELED)
        if labeled.size == 0:
            raise ValueError("y has no labeled nodes")
        self.classes_ = np.unique(y[labeled])
        if self.classes_.size < 2:
            raise ValueError("need at least two classes among the labeled nodes")
        encoded = np.zeros(n, dtype=np.int64)
        encoded[labeled] = np.searchsorted(self.classes_, y[labeled])

        val = check_index_set([] if val_idx is None else val_idx, n, "val_idx")
        if np.any(y[val] == UNLABELED):
            raise ValueError("val_idx must only reference labeled nodes")
        train = np.setdiff1d(labeled, val)
        if train.size == 0:
            raise ValueError("no labeled nodes left for training")

        self.operators_ = GraphOperators.from_hypergraph(self.hypergraph_)
        self.n_features_in_ = X.shape[1]
        self.params_, self.train_report_ = fit_params(
            self.operators_, X, encoded, train, val, self.classes_.size, config
        )
        return self

    def _forward(self, X):
        check_is_fitted(self, "params_")
        X = check_features(X, self.hypergraph_.num_nodes)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return forward(self.params_, self.operators_, X, parse_strategy(self.fusion))

    def predict_proba(self, X):
        return self._forward(X)["probs"]

    def predict(self, X):
        # argmax resolves ties to the lowest class index
        proba = self.predict_proba(X)
        return self.classes_[proba.argmax(axis=1)]

    def transform(self, X):
        """Fused node embeddings."""
        return self._forward(X)["fused"]

    def fusion_weights(self, X):
        """Per-node channel weights produced by the fusion step."""
        return self._forward(X)["weights"]
