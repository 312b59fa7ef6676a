"""scikit-learn style facade over the curve tracer.

``fit`` takes a RepPair in place of a design matrix; hyperparameters are
constructor arguments, fitted results carry a trailing underscore.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import manhattan as mh
from .coding import TruncationParams
from .schottky import RepPair


class ManhattanCurveEstimator(BaseEstimator):
    """Trace the Manhattan curve of a pair and summarize its rigidity functionals.

    >>> est = ManhattanCurveEstimator(ray_count=9).fit(pair)     # doctest: +SKIP
    >>> est.predict([0.5])                                        # doctest: +SKIP
    """

    def __init__(self, ray_count: int = mh.DEFAULT_RAYS, n_max: int = 64, max_power: int = 8,
                 tol_root: float = mh.DEFAULT_TOL_ROOT, line_tol: float = 1e-3, rigidity: bool = True,
                 threads: int | None = None):
        self.ray_count = ray_count
        self.n_max = n_max
        self.max_power = max_power
        self.tol_root = tol_root
        self.line_tol = line_tol
        self.rigidity = rigidity
        self.threads = threads

    def _params(self) -> TruncationParams:
        return TruncationParams(n_max=self.n_max, max_power=self.max_power)

    def fit(self, pair: RepPair, y=None):
        if not isinstance(pair, RepPair):
            raise TypeError(f"fit expects a RepPair, got {type(pair).__name__}")
        points = mh.trace_curve(pair, self.ray_count, self._params(), self.tol_root, self.threads)
        self.points_ = points
        self.a_ = np.array([p.a for p in points])
        self.b_ = np.array([p.b for p in points])
        self.error_bars_ = np.array([p.error_bar for p in points])
        self.h1_ = float(self.a_.max())
        self.h2_ = float(self.b_.max())
        if self.rigidity:
            self.report_ = mh.rigidity_report(pair, self._params(), points, self.ray_count, self.tol_root,
                                              self.line_tol, threads=self.threads)
        return self

    def predict(self, a):
        """b(a) by linear interpolation along the traced points."""
        check_is_fitted(self, "points_")
        order = np.argsort(self.a_)
        return np.interp(np.asarray(a, dtype=float), self.a_[order], self.b_[order])

    def score(self, pair: RepPair, y=None) -> float:
        """Negative chord deviation: 0 for a straight curve."""
        check_is_fitted(self, "points_")
        return -float(mh.chord_distance(self.points_, self.h1_, self.h2_).max())
