from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.config import DIFFICULTY_BANDS
from models.regression import DegenerateCohortError


class RegionLabel(str, Enum):
    """Where an item falls when the distance and correlation criteria are compared."""

    FAIR = 'Fair'
    PROPOSED_ONLY = 'ProposedOnly'
    BOTH = 'Both'
    TRADITIONAL_ONLY = 'TraditionalOnly'


@dataclass(frozen=True)
class ItemClassicStats:
    item_id: str
    r: object  # float, or None when the item column is constant
    p_value: float
    s_p: float
    s_g: float
    b1_difficulty: float


@dataclass(frozen=True)
class DifficultyEntry:
    item_id: str
    b1: float
    band: str


def item_total_correlation(item_column, totals):
    """
    Pearson correlation between item scores and totals (point-biserial for 0/1 items).

    Returns None for a constant item column: such items do not discriminate.
    """
    x = np.asarray(item_column, dtype=float)
    g = np.asarray(totals, dtype=float)
    if x.shape != g.shape or len(g) < 2:
        raise ValueError("Item column and totals must have the same length, at least 2")
    if np.ptp(g) == 0:
        raise DegenerateCohortError("Totals are constant; correlation is undefined")
    if np.ptp(x) == 0:
        return None

    x_centered = x - x.mean()
    g_centered = g - g.mean()
    r = np.dot(x_centered, g_centered) / np.sqrt(np.dot(x_centered, x_centered) * np.dot(g_centered, g_centered))
    return float(np.clip(r, -1.0, 1.0))


def item_statistics(m, points):
    """
    Classical statistics for the items of `points`, with totals over those items.

    Args:
        m (NormalizedMatrix): normalized scores
        points (list): ItemPoints from the same item set

    Returns:
        list: ItemClassicStats in the order of `points`
    """
    sub = m.subset([point.item_id for point in points])
    g = sub.totals
    s_g = float(np.std(g))
    stats = []
    for point in points:
        x = sub.column(point.item_id)
        stats.append(ItemClassicStats(
            item_id=point.item_id,
            r=item_total_correlation(x, g),
            p_value=float(x.mean()),
            s_p=float(np.std(x)),
            s_g=s_g,
            b1_difficulty=point.b1
        ))
    return stats


def classify_region(point, r, d_f):
    """
    Compare the distance criterion with the traditional r < 0 criterion.

    Args:
        point (ItemPoint): fitted item
        r (float or None): item-total correlation, None when undefined
        d_f (float): cutoff distance

    Returns:
        RegionLabel
    """
    if not d_f > 0:
        raise ValueError(f"d_f must be positive, got {d_f}")

    proposed = point.d < -d_f
    traditional = r is not None and r < 0
    if proposed and traditional:
        return RegionLabel.BOTH
    if proposed:
        return RegionLabel.PROPOSED_ONLY
    if traditional:
        return RegionLabel.TRADITIONAL_ONLY
    return RegionLabel.FAIR


def classify_all(points, stats, d_f):
    correlations = {s.item_id: s.r for s in stats}
    return {point.item_id: classify_region(point, correlations[point.item_id], d_f) for point in points}


def difficulty_profile(points, edges=None):
    """
    Items ordered by the slope b1, banded from trivial/easy through hard.

    b1 runs from 0 for trivial items to about 1 for moderate items and
    towards 2 for hard ones.
    """
    if not points:
        raise ValueError("Difficulty profile needs at least one item")
    low, high = edges or DIFFICULTY_BANDS['edges']
    if not low < high:
        raise ValueError(f"Band edges must be increasing, got {(low, high)}")
    easy, moderate, hard = DIFFICULTY_BANDS['labels']

    profile = []
    for point in sorted(points, key=lambda p: (p.b1, str(p.item_id))):
        if point.b1 < low:
            band = easy
        elif point.b1 < high:
            band = moderate
        else:
            band = hard
        profile.append(DifficultyEntry(item_id=point.item_id, b1=point.b1, band=band))
    return profile
