import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.stats import truncnorm

from config.config import GENERATOR_CONFIG
from data.ingest import ScoreMatrix

D = GENERATOR_CONFIG['scaling_constant']


class ItemSpecError(ValueError):
    """Malformed generator item specification."""


class ThetaDistribution(str, Enum):
    UNIFORM = 'uniform'
    NORMAL = 'normal'


@dataclass(frozen=True)
class IrtItem:
    """
    3PL item with an optional ceiling on the probability of a correct answer.

    cap < 1 marks an unfair item: no ability level gets it right for sure.
    """

    a: float
    b: float
    c: float = 0.0
    cap: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Discrimination a must be positive, got {self.a}")
        if not np.isfinite(self.b):
            raise ValueError(f"Difficulty b must be finite, got {self.b}")
        if not 0 <= self.c < 1:
            raise ValueError(f"Pseudo-guessing c must lie in [0, 1), got {self.c}")
        # cap = 0 is allowed only for an item nobody can answer (c = 0)
        if not (self.c < self.cap <= 1 or self.cap == self.c == 0):
            raise ValueError(f"cap must lie in (c, 1], got {self.cap} with c={self.c}")

    @property
    def is_unfair(self):
        return self.cap < 1


@dataclass(frozen=True)
class CohortSpec:
    n_examinees: int
    seed: int = GENERATOR_CONFIG['seed']
    theta_low: float = GENERATOR_CONFIG['theta_low']
    theta_high: float = GENERATOR_CONFIG['theta_high']
    theta_distribution: ThetaDistribution = ThetaDistribution(GENERATOR_CONFIG['theta_distribution'])

    def __post_init__(self):
        object.__setattr__(self, 'theta_distribution', ThetaDistribution(self.theta_distribution))
        if not isinstance(self.n_examinees, (int, np.integer)) or self.n_examinees < 1:
            raise ValueError(f"n_examinees must be a positive integer, got {self.n_examinees!r}")
        if not self.theta_low < self.theta_high:
            raise ValueError(f"theta_low must be below theta_high, got {self.theta_low}, {self.theta_high}")


@dataclass(frozen=True)
class GeneratedExam:
    scores: ScoreMatrix
    unfair_item_ids: tuple
    cohort: CohortSpec
    rng_algorithm: str
    thetas: np.ndarray = field(repr=False, compare=False)

    def truth_record(self):
        """Sidecar listing the injected unfair items and how to reproduce the draw."""
        return {
            'unfair_items': list(self.unfair_item_ids),
            'seed': int(self.cohort.seed),
            'rng_algorithm': self.rng_algorithm,
            'theta_distribution': self.cohort.theta_distribution.value,
            'theta_low': self.cohort.theta_low,
            'theta_high': self.cohort.theta_high,
            'n_examinees': int(self.cohort.n_examinees),
            'n_items': self.scores.n_items
        }


@dataclass(frozen=True)
class CrossingReport:
    crosses: bool
    coincide: bool
    crossings: tuple  # approximate theta of each sign change


@dataclass(frozen=True)
class LineIntersection:
    kind: str  # 'coincide', 'parallel' or 'point'
    point: tuple = None


def icc(theta, item):
    """
    Probability of a correct response under the capped 3PL model.

    With cap = 1 this is P = c + (1 - c) / (1 + exp(-D a (theta - b))).
    Accepts scalars or arrays of theta.
    """
    theta = np.asarray(theta, dtype=float)
    p = item.c + (1.0 - item.c) / (1.0 + np.exp(-D * item.a * (theta - item.b)))
    p = item.cap * p
    return float(p) if p.ndim == 0 else p


class ExamGenerator:
    """Synthetic person-by-item exams drawn from capped 3PL items."""

    def __init__(self, items, item_ids=None):
        """
        Args:
            items (list): IrtItem per item
            item_ids (list): labels, defaults to item_01, item_02, ...
        """
        items = list(items)
        if len(items) < 2:
            raise ValueError(f"At least 2 items are required, got {len(items)}")
        if item_ids is None:
            item_ids = [GENERATOR_CONFIG['item_id_format'].format(i + 1) for i in range(len(items))]
        if len(item_ids) != len(items):
            raise ValueError("One id per item is required")
        self.items = items
        self.item_ids = tuple(item_ids)
        self.logger = logging.getLogger(__name__)

    def draw_thetas(self, cohort, rng):
        if cohort.theta_distribution == ThetaDistribution.UNIFORM:
            return rng.uniform(cohort.theta_low, cohort.theta_high, size=cohort.n_examinees)
        return truncnorm.rvs(cohort.theta_low, cohort.theta_high, size=cohort.n_examinees, random_state=rng)

    def generate(self, cohort):
        """
        Draw abilities, then one Bernoulli response per examinee and item.

        Args:
            cohort (CohortSpec): cohort size, ability distribution and seed

        Returns:
            GeneratedExam: dichotomous scores plus the unfair-item ground truth
        """
        rng = np.random.default_rng(cohort.seed)
        thetas = self.draw_thetas(cohort, rng)
        probabilities = np.column_stack([icc(thetas, item) for item in self.items])
        responses = (rng.random(probabilities.shape) < probabilities).astype(float)

        examinee_ids = [GENERATOR_CONFIG['examinee_id_format'].format(k + 1) for k in range(cohort.n_examinees)]
        unfair = tuple(item_id for item_id, item in zip(self.item_ids, self.items) if item.is_unfair)
        self.logger.info(
            f"Generated {cohort.n_examinees} examinees x {len(self.items)} items "
            f"(seed={cohort.seed}, unfair={list(unfair)})"
        )
        return GeneratedExam(
            scores=ScoreMatrix(examinee_ids, self.item_ids, responses, np.ones(len(self.items))),
            unfair_item_ids=unfair,
            cohort=cohort,
            rng_algorithm=type(rng.bit_generator).__name__,
            thetas=thetas
        )


def generate(items, cohort, item_ids=None):
    return ExamGenerator(items, item_ids).generate(cohort)


def random_items(n_items, rng, a_range=(0.7, 1.6), b_range=(-2.0, 2.0), c_range=(0.0, 0.25)):
    """Fair 3PL items with parameters drawn uniformly from the given ranges."""
    a = rng.uniform(*a_range, size=n_items)
    b = rng.uniform(*b_range, size=n_items)
    c = rng.uniform(*c_range, size=n_items)
    return [IrtItem(a=float(a[i]), b=float(b[i]), c=float(c[i])) for i in range(n_items)]


def inject_unfair(items, count, cap, rng):
    """Cap `count` randomly chosen items at `cap`; returns the new list and the chosen positions."""
    if not 0 <= count <= len(items):
        raise ValueError(f"Cannot make {count} of {len(items)} items unfair")
    positions = sorted(int(i) for i in rng.choice(len(items), size=count, replace=False))
    capped = list(items)
    for i in positions:
        item = capped[i]
        # c must stay below the cap
        capped[i] = IrtItem(a=item.a, b=item.b, c=min(item.c, cap / 2), cap=cap)
    return capped, positions


def load_item_spec(path):
    """
    Read a JSON list of item objects {id?, a, b, c?, cap?}.

    Returns:
        tuple: (item ids, IrtItems)
    """
    try:
        with open(path, encoding='utf-8') as handle:
            spec = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ItemSpecError(f"Cannot read item spec {path}: {e}") from e

    if isinstance(spec, dict):
        spec = spec.get('items')
    if not isinstance(spec, list) or len(spec) < 2:
        raise ItemSpecError("Item spec must be a list of at least 2 item objects")

    item_ids, items = [], []
    for position, entry in enumerate(spec, start=1):
        if not isinstance(entry, dict):
            raise ItemSpecError(f"Item {position}: expected an object, got {type(entry).__name__}")
        unknown = set(entry) - {'id', 'a', 'b', 'c', 'cap'}
        if unknown:
            raise ItemSpecError(f"Item {position}: unknown fields {sorted(unknown)}")
        try:
            items.append(IrtItem(
                a=float(entry['a']),
                b=float(entry['b']),
                c=float(entry.get('c', 0.0)),
                cap=float(entry.get('cap', 1.0))
            ))
        except KeyError as e:
            raise ItemSpecError(f"Item {position}: missing field {e}") from None
        except (TypeError, ValueError) as e:
            raise ItemSpecError(f"Item {position}: {e}") from None
        item_ids.append(str(entry.get('id', GENERATOR_CONFIG['item_id_format'].format(position))))

    if len(set(item_ids)) != len(item_ids):
        raise ItemSpecError("Duplicate item ids in item spec")
    return item_ids, items


def lords_paradox_check(item_a, item_b, grid):
    """
    Locate where the characteristic curves of two items cross on a theta grid.

    Crossing curves mean neither item is uniformly harder. Each crossing is
    placed by linear interpolation between the bracketing grid points.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if len(grid) < 2:
        raise ValueError("The theta grid needs at least 2 points")

    diff = icc(grid, item_a) - icc(grid, item_b)
    if np.all(diff == 0):
        return CrossingReport(crosses=False, coincide=True, crossings=())

    crossings = []
    previous = None
    for i, value in enumerate(diff):
        if value == 0:
            continue
        if previous is not None:
            j, last = previous
            if np.sign(value) != np.sign(last):
                theta = grid[j] + (grid[i] - grid[j]) * last / (last - value)
                crossings.append(float(theta))
        previous = (i, value)
    return CrossingReport(crosses=bool(crossings), coincide=False, crossings=tuple(crossings))


def line_intersection(point_a, point_b, tol=1e-12):
    """
    Intersection of two regression lines p = b0 + b1 * g.

    Two distinct straight lines meet at most once, so two fair items whose
    lines both pass through (1, 1) can only meet there.
    """
    (a0, a1), (b0, b1) = point_a, point_b
    if abs(a1 - b1) <= tol:
        if abs(a0 - b0) <= tol:
            return LineIntersection(kind='coincide')
        return LineIntersection(kind='parallel')
    g = (b0 - a0) / (a1 - b1)
    return LineIntersection(kind='point', point=(g, a0 + a1 * g))
