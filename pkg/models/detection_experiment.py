import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from config.config import EXPERIMENT_CONFIG
from data.ingest import normalize
from data.irt_generator import CohortSpec, ExamGenerator, inject_unfair, random_items
from models.consensus import ConsensusConfig, detect_unfair


@dataclass(frozen=True)
class ExperimentParams:
    n_items: int = EXPERIMENT_CONFIG['n_items']
    n_examinees: int = EXPERIMENT_CONFIG['n_examinees']
    a_range: tuple = EXPERIMENT_CONFIG['a_range']
    b_range: tuple = EXPERIMENT_CONFIG['b_range']
    c_range: tuple = EXPERIMENT_CONFIG['c_range']
    n_unfair: int = EXPERIMENT_CONFIG['n_unfair']
    unfair_cap: float = EXPERIMENT_CONFIG['unfair_cap']
    theta_distribution: str = 'uniform'
    consensus: ConsensusConfig = field(default_factory=ConsensusConfig)


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    injected: frozenset
    flagged: frozenset
    sum_positive_before: float
    sum_positive_after: float

    @property
    def hits(self):
        return len(self.injected & self.flagged)

    @property
    def false_positives(self):
        return len(self.flagged - self.injected)

    @property
    def full_recall(self):
        return self.injected <= self.flagged


@dataclass(frozen=True)
class ExperimentSummary:
    outcomes: tuple

    @property
    def n_seeds(self):
        return len(self.outcomes)

    @property
    def seeds_with_full_recall(self):
        return sum(outcome.full_recall for outcome in self.outcomes)

    @property
    def mean_false_positives(self):
        return float(np.mean([outcome.false_positives for outcome in self.outcomes]))

    @property
    def seeds_without_flags(self):
        return sum(not outcome.flagged for outcome in self.outcomes)

    @property
    def seeds_with_contraction(self):
        return sum(o.sum_positive_after <= o.sum_positive_before for o in self.outcomes)

    def to_dict(self):
        return {
            'n_seeds': self.n_seeds,
            'seeds_with_full_recall': self.seeds_with_full_recall,
            'mean_false_positives': self.mean_false_positives,
            'seeds_without_flags': self.seeds_without_flags,
            'seeds_with_contraction': self.seeds_with_contraction,
            'outcomes': [
                {
                    'seed': o.seed,
                    'injected': sorted(o.injected),
                    'flagged': sorted(o.flagged),
                    'hits': o.hits,
                    'false_positives': o.false_positives,
                    'sum_positive_distances_before': o.sum_positive_before,
                    'sum_positive_distances_after': o.sum_positive_after
                }
                for o in self.outcomes
            ]
        }


class DetectionExperiment:
    """
    Seeded Monte Carlo check of the elimination loop against known unfair items.

    Each seed draws fresh 3PL items, caps `n_unfair` of them, simulates a
    cohort and records which items the consensus flags.
    """

    def __init__(self, params=None):
        self.params = params or ExperimentParams()
        self.logger = logging.getLogger(__name__)

    def run_seed(self, seed):
        params = self.params
        rng = np.random.default_rng(seed)
        items = random_items(params.n_items, rng, params.a_range, params.b_range, params.c_range)
        items, _ = inject_unfair(items, params.n_unfair, params.unfair_cap, rng)

        cohort = CohortSpec(
            n_examinees=params.n_examinees,
            seed=seed,
            theta_distribution=params.theta_distribution
        )
        exam = ExamGenerator(items).generate(cohort)
        result = detect_unfair(normalize(exam.scores), params.consensus)
        return SeedOutcome(
            seed=seed,
            injected=frozenset(exam.unfair_item_ids),
            flagged=frozenset(item_id for item_id, _ in result.unfair_items),
            sum_positive_before=result.sum_positive_distances_before,
            sum_positive_after=result.sum_positive_distances_after
        )

    def run(self, seeds=None, n_jobs=None):
        """
        Run every seed, in parallel when n_jobs > 1.

        Returns:
            ExperimentSummary: outcomes ordered by seed
        """
        seeds = sorted(EXPERIMENT_CONFIG['seeds'] if seeds is None else seeds)
        n_jobs = EXPERIMENT_CONFIG['n_jobs'] if n_jobs is None else n_jobs
        try:
            n_jobs = int(n_jobs)
        except ValueError:
            raise ValueError(f"n_jobs must be an integer, got {n_jobs!r}") from None
        outcomes = Parallel(n_jobs=n_jobs)(delayed(self.run_seed)(seed) for seed in seeds)
        summary = ExperimentSummary(outcomes=tuple(outcomes))
        self.logger.info(
            f"Experiment over {summary.n_seeds} seeds: full recall in {summary.seeds_with_full_recall}, "
            f"mean false positives {summary.mean_false_positives:.2f}, "
            f"no flags in {summary.seeds_without_flags}"
        )
        return summary
