import logging
from dataclasses import dataclass

import pandas as pd

from config.config import REPORT_CONFIG
from data.ingest import concatenate
from models.consensus import ConsensusEngine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupRow:
    label: str
    distances: dict  # item id -> d
    flagged: dict    # item id -> bool


@dataclass(frozen=True)
class GroupComparison:
    """
    Distances of every item flagged in at least one group, per group and pooled.

    Cells for items not flagged in a row are informational only.
    """

    item_ids: tuple
    groups: tuple
    pooled: GroupRow

    @property
    def rows(self):
        return self.groups + (self.pooled,)

    def to_frame(self):
        """Table layout: one row per group plus the pooled row, one column per item."""
        return pd.DataFrame(
            [[row.distances[item_id] for item_id in self.item_ids] for row in self.rows],
            index=[row.label for row in self.rows],
            columns=list(self.item_ids)
        )

    def to_dict(self):
        return {
            'item_ids': list(self.item_ids),
            'rows': [
                {
                    'label': row.label,
                    'cells': [
                        {'id': item_id, 'd': row.distances[item_id], 'flagged': row.flagged[item_id]}
                        for item_id in self.item_ids
                    ]
                }
                for row in self.rows
            ]
        }

    def to_text(self):
        """Table text; distances of non-flagged cells are shown in parentheses."""
        frame = pd.DataFrame(
            [
                [
                    f"{row.distances[item_id]:.2f}" if row.flagged[item_id] else f"({row.distances[item_id]:.2f})"
                    for item_id in self.item_ids
                ]
                for row in self.rows
            ],
            index=[row.label for row in self.rows],
            columns=list(self.item_ids)
        )
        return frame.to_string()


def _group_row(label, result):
    flagged = {item_id for item_id, _ in result.unfair_items}
    distances = result.final_distances()
    return GroupRow(
        label=label,
        distances=distances,
        flagged={item_id: item_id in flagged for item_id in distances}
    )


def compare_groups(groups, cfg=None):
    """
    Run the elimination per group and on all groups pooled together.

    Args:
        groups (list): (label, NormalizedMatrix) pairs over the same item ids
        cfg (ConsensusConfig): elimination settings

    Returns:
        GroupComparison: union of flagged items with per-group and pooled distances
    """
    groups = list(groups)
    if len(groups) < 2:
        raise ValueError(f"At least 2 groups are required, got {len(groups)}")
    labels = [label for label, _ in groups]
    if len(set(labels)) != len(labels):
        raise ValueError("Group labels must be unique")
    item_set = set(groups[0][1].item_ids)
    for label, matrix in groups[1:]:
        if set(matrix.item_ids) != item_set:
            raise ValueError(f"Group '{label}' does not cover the same item ids as '{labels[0]}'")

    engine = ConsensusEngine(cfg)
    rows = []
    for label, matrix in groups:
        logger.info(f"Analyzing group '{label}' ({matrix.n_examinees} examinees)")
        rows.append(_group_row(label, engine.detect_unfair(matrix)))

    # Pooled in label order so the listing order of groups does not matter
    ordered = sorted(groups, key=lambda pair: pair[0])
    pooled_matrix = concatenate([matrix for _, matrix in ordered], [label for label, _ in ordered])
    pooled = _group_row(REPORT_CONFIG['pooled_label'], engine.detect_unfair(pooled_matrix))

    item_order = groups[0][1].item_ids
    flagged_anywhere = {item_id for row in rows for item_id, is_flagged in row.flagged.items() if is_flagged}
    return GroupComparison(
        item_ids=tuple(item_id for item_id in item_order if item_id in flagged_anywhere),
        groups=tuple(rows),
        pooled=pooled
    )
