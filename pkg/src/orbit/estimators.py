"""scikit-learn style wrappers around correction and scale transfer.

``X`` is always a label stack of shape ``(T, rows, cols)``.  ``transform``
returns labels, ``predict`` returns water levels.
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_ordering, check_stack
from .exceptions import InvalidInputError
from .orbcor import correct_stack, err_profiles, learn_ordering
from .scale import FusionConfig, build_mapping_grid, candidate_lsr_ordering, estimate_wth, fuse
from .temporal import smooth_levels, smooth_stack

__all__ = ["OrderingCorrector", "CrossScaleFuser"]


class OrderingCorrector(TransformerMixin, BaseEstimator):
    """Physically consistent correction of a label stack.

    Parameters
    ----------
    ordering : array-like of shape (rows, cols), optional
        Known depth ranking.  When omitted, ``fit`` learns one from ``X``.
    alpha : float, optional
        Weight of the temporal transition cost.  ``None`` corrects each
        timestep independently.
    max_refine_iters : int, default=50
        Refinement passes when learning the ordering.

    Attributes
    ----------
    ordering_ : ndarray of shape (rows, cols)
    mismatch_history_ : list of int
        Total mismatch across refinement passes (empty if ``ordering`` given).
    """

    def __init__(self, ordering=None, alpha=None, max_refine_iters=50):
        self.ordering = ordering
        self.alpha = alpha
        self.max_refine_iters = max_refine_iters

    def fit(self, X, y=None):
        X = check_stack(X)
        if self.ordering is not None:
            self.ordering_ = check_ordering(self.ordering, shape=X.shape[1:])
            self.mismatch_history_ = []
        else:
            self.ordering_, self.mismatch_history_ = learn_ordering(
                X, self.max_refine_iters, return_history=True)
        return self

    def _solve(self, X):
        check_is_fitted(self, "ordering_")
        X = check_stack(X)
        if X.shape[1:] != self.ordering_.shape:
            raise InvalidInputError(
                f"X grid {X.shape[1:]} does not match fitted ordering {self.ordering_.shape}")
        if self.alpha is None:
            return correct_stack(X, self.ordering_)
        levels, labels, _ = smooth_stack(X, self.ordering_, self.alpha)
        return levels, labels

    def transform(self, X):
        return self._solve(X)[1]

    def predict(self, X):
        return self._solve(X)[0]

    def score(self, X, y=None):
        """Negative total objective of the fitted correction on ``X``."""
        check_is_fitted(self, "ordering_")
        profiles = err_profiles(X, self.ordering_)
        if self.alpha is None:
            return -float(profiles.min(axis=1).sum())
        return -smooth_levels(profiles, self.alpha)[1].total_cost


class CrossScaleFuser(BaseEstimator):
    """Coarse-to-fine label transfer.

    Parameters
    ----------
    factor : int, default=1
        Fine pixels per coarse cell side.
    offset : tuple of int, default=(0, 0)
        Lattice origin in fine pixels.
    wth : int or "auto", default="auto"
        Aggregation threshold; "auto" estimates it during ``fit``.
    alpha : float, optional
        Temporal weight for the coarse correction step.
    unknown_policy : {"keep", "fill_land", "fill_mid"}, default="keep"
    max_refine_iters : int, default=50
        Used when the fine ordering is learned from a training stack.

    Attributes
    ----------
    ordering_, coarse_ordering_, wth_, grid_
    """

    def __init__(self, factor=1, offset=(0, 0), wth="auto", alpha=None, unknown_policy="keep",
                 max_refine_iters=50):
        self.factor = factor
        self.offset = offset
        self.wth = wth
        self.alpha = alpha
        self.unknown_policy = unknown_policy
        self.max_refine_iters = max_refine_iters

    def fit(self, X, y=None, *, ordering=None, hsr_stack=None):
        """Fix the fine ordering and the threshold from coarse stack ``X``.

        Pass exactly one of ``ordering`` (fine ranks) or ``hsr_stack`` (fine
        training labels to learn the ranks from).
        """
        X = check_stack(X)
        if (ordering is None) == (hsr_stack is None):
            raise InvalidInputError("pass exactly one of ordering and hsr_stack")
        if ordering is None:
            ordering = learn_ordering(hsr_stack, self.max_refine_iters)
        self.ordering_ = check_ordering(ordering)
        self.grid_ = build_mapping_grid(*self.ordering_.shape, self.factor, self.offset)
        if isinstance(self.wth, str):
            if self.wth != "auto":
                raise InvalidInputError(f"wth must be an int or 'auto', got {self.wth!r}")
            self.wth_, self.coarse_ordering_, _ = estimate_wth(self.ordering_, self.grid_, X)
        else:
            self.wth_ = int(self.wth)
            self.coarse_ordering_ = candidate_lsr_ordering(self.ordering_, self.grid_, self.wth_)
        return self

    def _fuse(self, X):
        check_is_fitted(self, "wth_")
        config = FusionConfig(wth=self.wth_, alpha=self.alpha, unknown_policy=self.unknown_policy)
        return fuse(X, self.ordering_, factor=self.factor, offset=self.offset, config=config)

    def transform(self, X):
        """Fine label stack for coarse stack ``X``."""
        return self._fuse(X).labels

    def predict(self, X):
        """Corrected coarse water levels of ``X``."""
        return self._fuse(X).levels

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).transform(X)

    def fuse(self, X):
        """Full ``FusionResult`` (labels, levels, pivots, costs)."""
        return self._fuse(X)
