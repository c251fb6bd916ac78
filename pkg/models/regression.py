import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


class DegenerateCohortError(ValueError):
    """All examinees share the same total score; the item regression is undefined."""


@dataclass(frozen=True)
class ItemPoint:
    """
    An item as a point (b0, b1) of the coefficient plane.

    d is the signed distance from the ideal line b0 + b1 = 1; negative
    values lie on the unfair side.
    """

    item_id: str
    b0: float
    b1: float
    d: float
    mean_item_score: float
    n_examinees: int
    residual_variance: float = 0.0

    @classmethod
    def from_fit(cls, item_id, b0, b1, mean_item_score, n_examinees, residual_variance=0.0):
        return cls(
            item_id=item_id,
            b0=float(b0),
            b1=float(b1),
            d=distance(b0, b1),
            mean_item_score=float(mean_item_score),
            n_examinees=int(n_examinees),
            residual_variance=float(residual_variance)
        )

    @property
    def predicted_full_score(self):
        """Fitted proportion correct p(1) for examinees with a perfect total."""
        return self.b0 + self.b1


def _check_totals(totals):
    totals = np.asarray(totals, dtype=float)
    if totals.ndim != 1 or len(totals) < 2:
        raise ValueError("At least 2 examinees are required for an item regression")
    if np.ptp(totals) == 0:
        raise DegenerateCohortError(
            f"All {len(totals)} examinees have the same total score {totals[0]:g}; regression is undefined"
        )
    return totals


def fit_item_with_residuals(item_column, totals):
    """
    Ordinary least squares of item score on normalized total over examinees.

    Args:
        item_column (array-like): normalized item scores, length K
        totals (array-like): normalized totals g, length K

    Returns:
        tuple: (b0, b1, residual_variance)
    """
    g = _check_totals(totals)
    x = np.asarray(item_column, dtype=float)
    if x.shape != g.shape:
        raise ValueError(f"Item column length {len(x)} does not match {len(g)} totals")

    g_centered = g - g.mean()
    x_mean = x.mean()
    b1 = float(np.dot(x - x_mean, g_centered) / np.dot(g_centered, g_centered))
    b0 = float(x_mean - b1 * g.mean())
    residuals = x - (b0 + b1 * g)
    return b0, b1, float(np.mean(residuals ** 2))


def fit_item(item_column, totals):
    """Regression coefficients (b0, b1) of p(g) = b0 + b1 * g for one item."""
    b0, b1, _ = fit_item_with_residuals(item_column, totals)
    return b0, b1


def distance(b0, b1):
    """Signed distance of (b0, b1) from the ideal line b0 + b1 - 1 = 0."""
    return (b0 + b1 - 1.0) / SQRT2


def fit_all(m, item_subset=None):
    """
    Fit every item of a subset against totals recomputed over that subset.

    Args:
        m (NormalizedMatrix): normalized scores
        item_subset (iterable): item ids to fit; all items when None

    Returns:
        list: one ItemPoint per item, in matrix order
    """
    sub = m if item_subset is None else m.subset(item_subset)
    g = _check_totals(sub.totals)
    x = sub.entries

    # Vectorized form of fit_item_with_residuals over all columns
    g_centered = g - g.mean()
    x_mean = x.mean(axis=0)
    b1 = (x - x_mean).T @ g_centered / np.dot(g_centered, g_centered)
    b0 = x_mean - b1 * g.mean()
    residuals = x - (b0[np.newaxis, :] + np.outer(g, b1))
    residual_variance = np.mean(residuals ** 2, axis=0)

    points = [
        ItemPoint.from_fit(item_id, b0[i], b1[i], x_mean[i], sub.n_examinees, residual_variance[i])
        for i, item_id in enumerate(sub.item_ids)
    ]
    for point in points:
        logger.debug(f"Item {point.item_id}: b0={point.b0:.4f}, b1={point.b1:.4f}, d={point.d:.4f}")
    return points


def sum_positive_distances(points):
    """Sum of the positive distances from the ideal line."""
    return float(sum(max(point.d, 0.0) for point in points))
