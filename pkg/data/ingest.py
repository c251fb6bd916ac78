import io
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MAX_ROW_TAG = '#max'


class ScoreFileError(ValueError):
    """Malformed score file. Carries the 1-based row/column of the problem."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        prefix = f"{', '.join(location)}: " if location else ''
        super().__init__(f"{prefix}{message}")


def _frozen_array(values, dtype=float):
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Raw person-by-item scores with per-item maximum scores."""

    examinee_ids: tuple
    item_ids: tuple
    scores: np.ndarray
    max_scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'examinee_ids', tuple(self.examinee_ids))
        object.__setattr__(self, 'item_ids', tuple(self.item_ids))
        object.__setattr__(self, 'scores', _frozen_array(self.scores))
        object.__setattr__(self, 'max_scores', _frozen_array(self.max_scores))

        n_examinees, n_items = len(self.examinee_ids), len(self.item_ids)
        if n_examinees < 2 or n_items < 2:
            raise ValueError(
                f"Score matrix needs at least 2 examinees and 2 items, got {n_examinees}x{n_items}"
            )
        if self.scores.shape != (n_examinees, n_items):
            raise ValueError(f"Scores shape {self.scores.shape} does not match ids ({n_examinees}, {n_items})")
        if self.max_scores.shape != (n_items,):
            raise ValueError("One maximum score per item is required")
        if len(set(self.examinee_ids)) != n_examinees:
            raise ValueError("Duplicate examinee ids")
        if len(set(self.item_ids)) != n_items:
            raise ValueError("Duplicate item ids")
        if not np.all(np.isfinite(self.scores)) or not np.all(np.isfinite(self.max_scores)):
            raise ValueError("Scores and maxima must be finite")
        if np.any(self.max_scores <= 0):
            raise ValueError("Maximum scores must be positive")
        if np.any(self.scores < 0) or np.any(self.scores > self.max_scores):
            raise ValueError("Scores must lie between 0 and the item maximum")

    @property
    def n_examinees(self):
        return len(self.examinee_ids)

    @property
    def n_items(self):
        return len(self.item_ids)

    def column(self, item_id):
        return self.scores[:, self.item_ids.index(item_id)]

    def __eq__(self, other):
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return (self.examinee_ids == other.examinee_ids
                and self.item_ids == other.item_ids
                and np.array_equal(self.scores, other.scores)
                and np.array_equal(self.max_scores, other.max_scores))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NormalizedMatrix:
    """
    Scores mapped to [0, 1] per item, with per-examinee normalized totals g.

    The raw scores and maxima travel with the normalized entries so that
    item weights can be restored after elimination.
    """

    examinee_ids: tuple
    item_ids: tuple
    entries: np.ndarray
    totals: np.ndarray
    raw_scores: np.ndarray
    max_scores: np.ndarray

    def __post_init__(self):
        for name in ('examinee_ids', 'item_ids'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ('entries', 'totals', 'raw_scores', 'max_scores'):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

        shape = (len(self.examinee_ids), len(self.item_ids))
        if self.entries.shape != shape or self.raw_scores.shape != shape:
            raise ValueError(f"Normalized entries must have shape {shape}")
        if self.totals.shape != (shape[0],):
            raise ValueError("One total per examinee is required")
        if np.any(self.entries < 0) or np.any(self.entries > 1):
            raise ValueError("Normalized entries must lie in [0, 1]")

    @property
    def n_examinees(self):
        return len(self.examinee_ids)

    @property
    def n_items(self):
        return len(self.item_ids)

    def column(self, item_id):
        return self.entries[:, self.item_ids.index(item_id)]

    def percentage_totals(self):
        """Percentage score 100*g per examinee."""
        return 100.0 * self.totals

    def subset(self, item_ids):
        """
        Restrict the matrix to a set of items, keeping the original item order.

        Totals are recomputed over the subset, so N becomes the subset size.
        """
        wanted = set(item_ids)
        unknown = wanted - set(self.item_ids)
        if unknown:
            raise ValueError(f"Unknown item ids: {sorted(map(str, unknown))}")
        if not wanted:
            raise ValueError("Item subset must not be empty")

        columns = [i for i, item_id in enumerate(self.item_ids) if item_id in wanted]
        entries = self.entries[:, columns]
        return NormalizedMatrix(
            examinee_ids=self.examinee_ids,
            item_ids=tuple(self.item_ids[i] for i in columns),
            entries=entries,
            totals=entries.mean(axis=1),
            raw_scores=self.raw_scores[:, columns],
            max_scores=self.max_scores[columns]
        )

    def to_score_matrix(self):
        return ScoreMatrix(self.examinee_ids, self.item_ids, self.raw_scores, self.max_scores)

    def __eq__(self, other):
        if not isinstance(other, NormalizedMatrix):
            return NotImplemented
        return (self.examinee_ids == other.examinee_ids
                and self.item_ids == other.item_ids
                and np.array_equal(self.entries, other.entries)
                and np.array_equal(self.raw_scores, other.raw_scores)
                and np.array_equal(self.max_scores, other.max_scores))

    __hash__ = None


class ScoreFileParser:
    """
    Parser for the person-by-item score CSV.

    Layout: a header row of item ids, an optional `#max,...` row of item
    maxima (default 1), then one `examinee_id,score,...` row per examinee.
    Missing cells are rejected rather than imputed.
    """

    def parse(self, text):
        """
        Parse a score document.

        Args:
            text (str): CSV document

        Returns:
            ScoreMatrix: validated raw scores
        """
        rows = self._read_rows(text)
        if not rows:
            raise ScoreFileError("Score file is empty")

        header_row, header = rows[0]
        item_ids = self._parse_header(header_row, header)
        n_items = len(item_ids)

        body = rows[1:]
        max_scores = np.ones(n_items)
        if body and body[0][1][0] == MAX_ROW_TAG:
            max_row, cells = body[0]
            max_scores = self._parse_max_row(max_row, cells, n_items)
            body = body[1:]

        if len(body) < 2:
            raise ScoreFileError(f"At least 2 examinee rows are required, found {len(body)}")

        examinee_ids = []
        seen = {}
        scores = np.empty((len(body), n_items))
        for k, (row_number, cells) in enumerate(body):
            examinee_id = cells[0]
            if not examinee_id:
                raise ScoreFileError("Missing examinee id", row=row_number, column=1)
            if examinee_id in seen:
                raise ScoreFileError(
                    f"Duplicate examinee id '{examinee_id}' (first seen in row {seen[examinee_id]})",
                    row=row_number, column=1
                )
            seen[examinee_id] = row_number
            examinee_ids.append(examinee_id)
            scores[k] = self._parse_score_row(row_number, cells, max_scores)

        logger.debug(f"Parsed score file: {len(examinee_ids)} examinees x {n_items} items")
        return ScoreMatrix(examinee_ids, item_ids, scores, max_scores)

    def _read_rows(self, text):
        """
        Read the document as strings, one list of stripped cells per non-blank row.

        Blank lines are kept while reading so that rows keep their 1-based
        line numbers. Cells past the end of a short row come back as NaN and
        are dropped, so a ragged row is shorter than its neighbours.
        """
        if not text.strip():
            return []
        # Upper bound on the row width; surplus columns stay NaN
        width = max(line.count(',') for line in text.splitlines()) + 1
        frame = pd.read_csv(
            io.StringIO(text),
            header=None,
            names=list(range(width)),
            index_col=False,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False
        )

        rows = []
        for row_number, values in enumerate(frame.itertuples(index=False, name=None), start=1):
            cells = [value.strip() for value in values if not pd.isna(value)]
            if any(cells):
                rows.append((row_number, cells))
        return rows

    def _parse_header(self, row_number, header):
        if header and header[0] == '':
            header = header[1:]
        if len(header) < 2:
            raise ScoreFileError(f"At least 2 item columns are required, found {len(header)}", row=row_number)

        seen = set()
        for position, item_id in enumerate(header, start=1):
            if not item_id:
                raise ScoreFileError("Empty item id", row=row_number, column=position)
            if item_id in seen:
                raise ScoreFileError(f"Duplicate item id '{item_id}'", row=row_number, column=position)
            seen.add(item_id)
        return tuple(header)

    def _parse_max_row(self, row_number, cells, n_items):
        self._check_width(row_number, cells, n_items)
        maxima = np.empty(n_items)
        for i, cell in enumerate(cells[1:]):
            value = self._parse_number(cell, row_number, i + 2)
            if value <= 0:
                raise ScoreFileError(f"Item maximum must be positive, got {cell}", row=row_number, column=i + 2)
            maxima[i] = value
        return maxima

    def _parse_score_row(self, row_number, cells, max_scores):
        self._check_width(row_number, cells, len(max_scores))
        values = np.empty(len(max_scores))
        for i, cell in enumerate(cells[1:]):
            column = i + 2
            value = self._parse_number(cell, row_number, column)
            if value < 0:
                raise ScoreFileError(f"Negative score {cell}", row=row_number, column=column)
            if value > max_scores[i]:
                raise ScoreFileError(
                    f"Score {cell} exceeds item maximum {max_scores[i]:g}",
                    row=row_number, column=column
                )
            values[i] = value
        return values

    def _check_width(self, row_number, cells, n_items):
        if len(cells) != n_items + 1:
            raise ScoreFileError(
                f"Ragged row: expected {n_items + 1} cells (id + {n_items} scores), found {len(cells)}",
                row=row_number
            )

    def _parse_number(self, cell, row_number, column):
        if cell == '':
            raise ScoreFileError("Missing response", row=row_number, column=column)
        try:
            value = float(cell)
        except ValueError:
            raise ScoreFileError(f"Non-numeric score '{cell}'", row=row_number, column=column) from None
        if not math.isfinite(value):
            raise ScoreFileError(f"Non-finite score '{cell}'", row=row_number, column=column)
        return value


def parse_score_csv(text):
    """Parse a score CSV document into a validated ScoreMatrix."""
    return ScoreFileParser().parse(text)


def load_score_file(path):
    """Load a score CSV file (UTF-8, BOM tolerated)."""
    try:
        with open(path, encoding='utf-8-sig') as handle:
            text = handle.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ScoreFileError(f"Cannot read score file {path}: {e}") from e
    return parse_score_csv(text)


def _format_number(value):
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def serialize_score_csv(m):
    """
    Write a ScoreMatrix back to the CSV layout parse_score_csv reads.

    The `#max` row is only written when some item maximum differs from 1.
    """
    frame = pd.DataFrame(
        [[_format_number(v) for v in row] for row in m.scores],
        index=pd.Index(m.examinee_ids),
        columns=list(m.item_ids)
    )
    if np.any(m.max_scores != 1):
        max_row = pd.DataFrame([[_format_number(v) for v in m.max_scores]],
                               index=[MAX_ROW_TAG], columns=frame.columns)
        frame = pd.concat([max_row, frame])
    # index_label=False leaves the corner cell out of the header row
    return frame.to_csv(index_label=False, lineterminator='\n')


def normalize(m):
    """
    Divide every score by its item maximum and compute normalized totals.

    Args:
        m (ScoreMatrix): raw scores

    Returns:
        NormalizedMatrix: entries in [0, 1] and totals g_k = sum_i entries[k, i] / N
    """
    entries = m.scores / m.max_scores
    return NormalizedMatrix(
        examinee_ids=m.examinee_ids,
        item_ids=m.item_ids,
        entries=entries,
        totals=entries.mean(axis=1),
        raw_scores=m.scores,
        max_scores=m.max_scores
    )


def total_scores(m):
    """Normalized totals g in examinee order."""
    return [float(g) for g in m.totals]


def concatenate(matrices, prefixes):
    """
    Stack normalized matrices over the same items row-wise.

    Examinee ids are prefixed with their group label so they stay unique.
    """
    matrices = list(matrices)
    prefixes = list(prefixes)
    if len(matrices) != len(prefixes) or not matrices:
        raise ValueError("One prefix per matrix is required")

    item_ids = matrices[0].item_ids
    aligned = []
    for matrix in matrices:
        if set(matrix.item_ids) != set(item_ids):
            raise ValueError("All matrices must cover the same item ids")
        order = [matrix.item_ids.index(item_id) for item_id in item_ids]
        aligned.append((matrix, order))

    examinee_ids = [
        f"{prefix}/{examinee_id}"
        for (matrix, _), prefix in zip(aligned, prefixes)
        for examinee_id in matrix.examinee_ids
    ]
    entries = np.vstack([matrix.entries[:, order] for matrix, order in aligned])
    raw_scores = np.vstack([matrix.raw_scores[:, order] for matrix, order in aligned])
    max_scores = aligned[0][0].max_scores[aligned[0][1]]
    for matrix, order in aligned[1:]:
        if not np.array_equal(matrix.max_scores[order], max_scores):
            raise ValueError("Item maxima differ between matrices")

    return NormalizedMatrix(
        examinee_ids=examinee_ids,
        item_ids=item_ids,
        entries=entries,
        totals=entries.mean(axis=1),
        raw_scores=raw_scores,
        max_scores=max_scores
    )
