import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.config import CONSENSUS_CONFIG, MAD_CONSISTENCY_CONSTANT
from models.regression import SQRT2, fit_all, sum_positive_distances

# Lowest reachable distance: an item nobody answers correctly, (b0, b1) = (0, 0)
ALL_WRONG_DISTANCE = -1.0 / SQRT2
FLOOR_TOLERANCE = 1e-9


def is_below_floor(point):
    """True when the fitted p(1) = b0 + b1 is negative, i.e. the point lies below line CD."""
    return point.d < ALL_WRONG_DISTANCE - FLOOR_TOLERANCE


class ConsensusError(ValueError):
    """Too few distances to form a consensus."""


class ConsensusCollapseError(RuntimeError):
    """Elimination left too few items to continue."""


class CutoffRule(str, Enum):
    MAD_SCALED = 'mad_scaled'
    FIXED = 'fixed'


def _positive_number(name, value):
    # environment overrides arrive as strings
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ValueError(f"{name} must be a positive number, got {value!r}") from None
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ConsensusConfig:
    """
    Settings for the unfair item elimination loop.

    Args:
        cutoff_rule (CutoffRule): robust MAD spread or a fixed d_f
        mad_multiplier (float): multiplier on the scaled MAD
        cutoff_floor (float): smallest d_f the MAD rule may return
        fixed_cutoff (float): d_f used by the fixed rule
        max_iterations (int): round limit, defaults to the number of items
    """

    cutoff_rule: CutoffRule = CONSENSUS_CONFIG['cutoff_rule']
    mad_multiplier: float = CONSENSUS_CONFIG['mad_multiplier']
    cutoff_floor: float = CONSENSUS_CONFIG['cutoff_floor']
    fixed_cutoff: float = CONSENSUS_CONFIG['fixed_cutoff']
    max_iterations: int = CONSENSUS_CONFIG['max_iterations']

    def __post_init__(self):
        try:
            object.__setattr__(self, 'cutoff_rule', CutoffRule(self.cutoff_rule))
        except ValueError:
            rules = [rule.value for rule in CutoffRule]
            raise ValueError(f"cutoff_rule must be one of {rules}, got {self.cutoff_rule!r}") from None
        for name in ('mad_multiplier', 'cutoff_floor', 'fixed_cutoff'):
            object.__setattr__(self, name, _positive_number(name, getattr(self, name)))
        if self.max_iterations is not None:
            if not isinstance(self.max_iterations, int) or isinstance(self.max_iterations, bool) \
                    or self.max_iterations < 1:
                raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")

    @classmethod
    def from_dict(cls, values=None):
        """Build a config from CONSENSUS_CONFIG defaults updated with `values`."""
        merged = dict(CONSENSUS_CONFIG)
        unknown = set(values or {}) - set(merged)
        if unknown:
            raise ValueError(f"Unknown consensus settings: {sorted(unknown)}")
        merged.update({key: value for key, value in (values or {}).items() if value is not None})
        return cls(**merged)

    def to_dict(self):
        return {
            'cutoff_rule': self.cutoff_rule.value,
            'mad_multiplier': self.mad_multiplier,
            'cutoff_floor': self.cutoff_floor,
            'fixed_cutoff': self.fixed_cutoff,
            'max_iterations': self.max_iterations
        }


@dataclass(frozen=True)
class Iteration:
    item_points: tuple
    d_f: float
    removed: frozenset


@dataclass(frozen=True)
class RescoredTotals:
    """Final scores over the fair items with the original item weights."""

    examinee_ids: tuple
    scores: tuple
    max_score: float
    percentages: tuple


@dataclass(frozen=True)
class AnalysisResult:
    """
    Every elimination round plus the final split.

    survivor_points are the fair items fitted against totals over the fair
    items alone. They match the last round unless the round limit stopped
    the loop while it was still removing items.
    """

    iterations: tuple
    fair_items: frozenset
    unfair_items: tuple
    rescored_totals: RescoredTotals
    survivor_points: tuple

    @property
    def final_cutoff(self):
        return self.iterations[-1].d_f

    @property
    def sum_positive_distances_before(self):
        return sum_positive_distances(self.iterations[0].item_points)

    @property
    def sum_positive_distances_after(self):
        return sum_positive_distances(self.survivor_points)

    def final_distances(self):
        """Item id -> d from the last round the item took part in."""
        distances = {}
        for iteration in self.iterations:
            for point in iteration.item_points:
                distances[point.item_id] = point.d
        return distances

    def final_points(self):
        """Item id -> ItemPoint from the last round the item took part in."""
        points = {}
        for iteration in self.iterations:
            for point in iteration.item_points:
                points[point.item_id] = point
        return points


def find_cutoff(distances, cfg):
    """
    Limit d_f for the distance of a fair item from the ideal line.

    Args:
        distances (list): signed distances of the current items
        cfg (ConsensusConfig): cutoff settings

    Returns:
        float: positive cutoff d_f
    """
    distances = np.asarray(distances, dtype=float)
    if len(distances) < 3:
        raise ConsensusError(f"A consensus needs at least 3 items, got {len(distances)}")

    if cfg.cutoff_rule == CutoffRule.FIXED:
        return cfg.fixed_cutoff

    mad = np.median(np.abs(distances - np.median(distances)))
    return float(max(cfg.cutoff_floor, cfg.mad_multiplier * MAD_CONSISTENCY_CONSTANT * mad))


def rescore(raw, fair_items):
    """
    Sum raw scores over the fair items, restoring the original item weights.

    Args:
        raw (ScoreMatrix): raw scores
        fair_items (set): ids of the items that survived elimination

    Returns:
        RescoredTotals: per-examinee scores and percentages of the fair maximum
    """
    fair_items = set(fair_items)
    if not fair_items:
        raise ValueError("Cannot rescore without fair items")
    unknown = fair_items - set(raw.item_ids)
    if unknown:
        raise ValueError(f"Unknown item ids: {sorted(map(str, unknown))}")

    columns = [i for i, item_id in enumerate(raw.item_ids) if item_id in fair_items]
    scores = raw.scores[:, columns].sum(axis=1)
    max_score = float(raw.max_scores[columns].sum())
    return RescoredTotals(
        examinee_ids=tuple(raw.examinee_ids),
        scores=tuple(float(s) for s in scores),
        max_score=max_score,
        percentages=tuple(float(100.0 * s / max_score) for s in scores)
    )


class ConsensusEngine:
    """
    Iterative elimination of items lying outside the fair-item consensus.

    Each round refits every surviving item against totals over the
    survivors, derives d_f and removes every item with d < -d_f. The loop
    stops when a round removes nothing.
    """

    def __init__(self, config=None):
        self.config = config or ConsensusConfig()
        self.logger = logging.getLogger(__name__)

    def detect_unfair(self, m):
        """
        Run the elimination loop on a normalized matrix.

        Args:
            m (NormalizedMatrix): normalized scores

        Returns:
            AnalysisResult: every round plus the final fair/unfair split
        """
        if m.n_items < 3:
            raise ConsensusError(f"A consensus needs at least 3 items, got {m.n_items}")

        max_iterations = self.config.max_iterations or m.n_items
        surviving = list(m.item_ids)
        iterations = []
        removal_distance = {}

        for round_number in range(1, max_iterations + 1):
            points = fit_all(m, surviving)
            self._check_floor(points)
            d_f = find_cutoff([point.d for point in points], self.config)
            removed = frozenset(point.item_id for point in points if point.d < -d_f)
            iterations.append(Iteration(item_points=tuple(points), d_f=d_f, removed=removed))

            self.logger.info(
                f"Round {round_number}: {len(points)} items, d_f={d_f:.4f}, "
                f"removed={sorted(map(str, removed)) or 'none'}"
            )
            if not removed:
                break

            for point in points:
                if point.item_id in removed:
                    removal_distance[point.item_id] = point.d
            surviving = [item_id for item_id in surviving if item_id not in removed]
            if len(surviving) < 3:
                self.logger.warning(f"Consensus collapsed after round {round_number}: {len(surviving)} items left")
                raise ConsensusCollapseError(
                    f"Elimination left {len(surviving)} of {m.n_items} items after round {round_number}; "
                    f"at least 3 are needed"
                )

        unfair_items = tuple(
            (item_id, removal_distance[item_id]) for item_id in m.item_ids if item_id in removal_distance
        )
        survivor_points = iterations[-1].item_points
        if iterations[-1].removed:
            self.logger.info(f"Round limit {max_iterations} reached; refitting {len(surviving)} surviving items")
            survivor_points = tuple(fit_all(m, surviving))

        fair_items = frozenset(surviving)
        return AnalysisResult(
            iterations=tuple(iterations),
            fair_items=fair_items,
            unfair_items=unfair_items,
            rescored_totals=rescore(m.to_score_matrix(), fair_items),
            survivor_points=survivor_points
        )

    def _check_floor(self, points):
        for point in points:
            if is_below_floor(point):
                self.logger.warning(
                    f"Item {point.item_id} lies below b0 + b1 = 0 (d={point.d:.4f}); "
                    f"the linear fit extrapolates a negative proportion at g = 1"
                )


def detect_unfair(m, cfg=None):
    """Identify unfair items of a normalized matrix; see ConsensusEngine."""
    return ConsensusEngine(cfg).detect_unfair(m)
