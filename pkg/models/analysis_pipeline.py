import logging
from dataclasses import dataclass

from data.ingest import normalize
from models.classic import classify_region, difficulty_profile, item_statistics
from models.consensus import ConsensusConfig, ConsensusEngine, is_below_floor


@dataclass(frozen=True)
class ItemAnalysis:
    """Everything one analysis run produces, ready for reporting."""

    config: ConsensusConfig
    result: object  # AnalysisResult
    classic_stats: tuple
    regions: dict
    region_cutoffs: dict
    difficulty: tuple
    below_floor: tuple


class ItemAnalysisPipeline:
    """
    Complete unfair item analysis that ties together normalization,
    consensus elimination, classical statistics and rescoring.
    """

    def __init__(self, config=None):
        """
        Initialize the analysis pipeline.

        Args:
            config (ConsensusConfig): elimination settings, defaults from CONSENSUS_CONFIG
        """
        self.config = config or ConsensusConfig()
        self.engine = ConsensusEngine(self.config)
        self.logger = logging.getLogger(__name__)

    def analyze(self, raw):
        """
        Analyze a raw score matrix.

        Args:
            raw (ScoreMatrix): person-by-item scores

        Returns:
            ItemAnalysis: consensus result with the traditional comparison
        """
        normalized = normalize(raw)
        result = self.engine.detect_unfair(normalized)

        # The traditional criterion looks at the whole test, as administered
        classic_stats = item_statistics(normalized, result.iterations[0].item_points)
        correlations = {s.item_id: s.r for s in classic_stats}

        # Each item is judged against the cutoff of the last round it took part in
        points, cutoffs = {}, {}
        for iteration in result.iterations:
            for point in iteration.item_points:
                points[point.item_id] = point
                cutoffs[point.item_id] = iteration.d_f

        regions = {
            item_id: classify_region(points[item_id], correlations[item_id], cutoffs[item_id])
            for item_id in raw.item_ids
        }
        below_floor = tuple(item_id for item_id in raw.item_ids if is_below_floor(points[item_id]))

        self.logger.info(
            f"Analysis complete: {len(result.iterations)} rounds, "
            f"{len(result.unfair_items)} unfair of {raw.n_items} items"
        )
        return ItemAnalysis(
            config=self.config,
            result=result,
            classic_stats=tuple(classic_stats),
            regions=regions,
            region_cutoffs=cutoffs,
            difficulty=tuple(difficulty_profile([points[item_id] for item_id in raw.item_ids])),
            below_floor=below_floor
        )
