###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""L2-regularized logistic regression trained by full-batch descent."""
import logging
import warnings

import numpy as np
from scipy.special import expit

from neuroexam.abstracts import Classifier
from neuroexam.errors import ConvergenceWarning

LOGGER = logging.getLogger(__name__)

# Armijo sufficient decrease constant.
ARMIJO_C = 1e-4
MIN_STEP = 1e-12


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise ValueError("Expected a non-empty (rows, columns) matrix and "
                         "one target per row.")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("Targets must be 0 or 1.")
    return X, y


def loss_and_gradient(theta, X, y, l2):
    """
    Mean logistic loss with an L2 penalty on the weights, and its gradient.

    :param theta: Weights followed by the bias, shape (columns + 1,).
    :returns: (loss, gradient)
    """
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)
                 + 0.5 * l2 * np.dot(w, w))
    residual = expit(z) - y
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ residual / len(y) + l2 * w
    grad[-1] = np.mean(residual)
    return loss, grad


class LogisticRegression(Classifier):
    """Binary logistic regression with backtracking gradient descent."""

    key = "logreg"

    def __init__(self, lr=0.1, epochs=2000, l2=1e-3, tol=1e-8):
        if not lr > 0 or int(epochs) < 1 or l2 < 0 or not tol > 0:
            msg = "Invalid logistic regression settings: lr={}, epochs={}, " \
                  "l2={}, tol={}.".format(lr, epochs, l2, tol)
            LOGGER.error(msg)
            raise ValueError(msg)
        self.lr = float(lr)
        self.epochs = int(epochs)
        self.l2 = float(l2)
        self.tol = float(tol)
        self.weights = None
        self.bias = 0.0
        self.history = []

    def fit(self, X, y):
        """
        Minimize the regularized loss from zero weights.

        Every accepted step satisfies the Armijo condition, so the recorded
        loss history never increases.
        """
        X, y = _check_xy(X, y)
        theta = np.zeros(X.shape[1] + 1)
        loss, grad = loss_and_gradient(theta, X, y, self.l2)
        history = [loss]
        step = self.lr
        converged = False

        for _ in range(self.epochs):
            norm2 = float(np.dot(grad, grad))
            if np.sqrt(norm2) < self.tol:
                converged = True
                break
            while True:
                candidate = theta - step * grad
                new_loss, new_grad = loss_and_gradient(candidate, X, y,
                                                       self.l2)
                if new_loss <= loss - ARMIJO_C * step * norm2:
                    break
                step /= 2.0
                if step < MIN_STEP:
                    break
            if step < MIN_STEP:
                converged = True
                break
            theta, loss, grad = candidate, new_loss, new_grad
            history.append(loss)
            step = min(self.lr, 2.0 * step)

        if not converged:
            tail = max(1, len(history) // 10)
            if history[-1] >= history[-1 - tail]:
                msg = "Logistic regression loss did not decrease over the " \
                      "final {} epochs.".format(tail)
                LOGGER.warning(msg)
                warnings.warn(msg, ConvergenceWarning)

        self.weights, self.bias = theta[:-1], float(theta[-1])
        self.history = history
        LOGGER.debug("Logistic regression trained: loss %.6g after %d "
                     "epoch(s).", loss, len(history) - 1)
        return self

    def predict_proba(self, X):
        if self.weights is None:
            raise ValueError("Logistic regression is not fitted.")
        return expit(np.asarray(X, dtype=float) @ self.weights + self.bias)

    def loss(self, X, y):
        X, y = _check_xy(X, y)
        theta = np.append(self.weights, self.bias)
        return loss_and_gradient(theta, X, y, self.l2)[0]

    def feature_importance(self, columns):
        """Absolute weights normalized to sum 1, descending."""
        weights = np.abs(self.weights)
        total = float(np.sum(weights))
        if total == 0:
            return None
        ranked = sorted(zip(columns, weights / total),
                        key=lambda item: -item[1])
        return [(name, float(w)) for name, w in ranked]

    def to_dict(self):
        return {
            "model": self.key,
            "params": {"lr": self.lr, "epochs": self.epochs, "l2": self.l2,
                       "tol": self.tol},
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(**data["params"])
        model.weights = np.asarray(data["weights"], dtype=float)
        model.bias = float(data["bias"])
        return model


def train_logreg(X, y, lr=0.1, epochs=2000, l2=1e-3, tol=1e-8):
    return LogisticRegression(lr, epochs, l2, tol).fit(X, y)
