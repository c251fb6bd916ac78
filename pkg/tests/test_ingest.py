#!/usr/bin/env python3
"""
Unit tests for score file ingestion and normalization
"""

import os
import sys
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

# Add project root to path
current_dir = os.path.dirname(os.path.abspath(__file__))
project_root = os.path.dirname(current_dir)
sys.path.append(project_root)

from data.ingest import (NormalizedMatrix, ScoreFileError, ScoreMatrix, concatenate, load_score_file,
                         normalize, parse_score_csv, serialize_score_csv, total_scores)


class TestScoreFileParser(unittest.TestCase):
    """Test cases for parse_score_csv"""

    def test_minimal_file(self):
        """Test a 2x2 dichotomous file"""
        m = parse_score_csv("i1,i2\ns1,1,0\ns2,0,1\n")

        self.assertEqual(m.item_ids, ('i1', 'i2'))
        self.assertEqual(m.examinee_ids, ('s1', 's2'))
        np.testing.assert_array_equal(m.scores, [[1, 0], [0, 1]])
        np.testing.assert_array_equal(m.max_scores, [1, 1])

    def test_leading_empty_header_cell(self):
        """Test that a header with an empty corner cell is accepted"""
        m = parse_score_csv(",i1,i2\ns1,1,0\ns2,0,1\n")
        self.assertEqual(m.item_ids, ('i1', 'i2'))

    def test_ragged_row_names_row(self):
        """Test that a short row is reported with its row number"""
        with self.assertRaises(ScoreFileError) as ctx:
            parse_score_csv("i1,i2\ns1,1,0\ns2,0,1\ns3,1\n")

        self.assertEqual(ctx.exception.row, 4)
        self.assertIn('row 4', str(ctx.exception))
        self.assertIn('Ragged', str(ctx.exception))

    def test_max_row(self):
        """Test that the #max row sets item maxima"""
        m = parse_score_csv("i1,i2\n#max,5,1\ns1,2,1\ns2,5,0\n")

        np.testing.assert_array_equal(m.max_scores, [5, 1])
        self.assertEqual(m.scores[0, 0], 2)

    def test_score_above_maximum(self):
        """Test that a score above the item maximum is rejected"""
        with self.assertRaises(ScoreFileError) as ctx:
            parse_score_csv("i1,i2\ns1,2,0\ns2,0,1\n")

        self.assertEqual(ctx.exception.row, 2)
        self.assertEqual(ctx.exception.column, 2)

    def test_invalid_cells(self):
        """Test handling of missing, negative and non-numeric cells"""
        for bad in ('', '-1', 'x', 'nan', 'inf'):
            with self.subTest(cell=bad):
                with self.assertRaises(ScoreFileError) as ctx:
                    parse_score_csv(f"i1,i2\ns1,1,{bad}\ns2,0,1\n")
                self.assertEqual(ctx.exception.row, 2)
                self.assertEqual(ctx.exception.column, 3)

    def test_duplicate_ids(self):
        """Test that duplicate item or examinee ids are rejected"""
        with self.assertRaises(ScoreFileError):
            parse_score_csv("i1,i1\ns1,1,0\ns2,0,1\n")
        with self.assertRaises(ScoreFileError) as ctx:
            parse_score_csv("i1,i2\ns1,1,0\ns1,0,1\n")
        self.assertEqual(ctx.exception.row, 3)

    def test_too_small(self):
        """Test that fewer than 2 items or examinees are rejected"""
        with self.assertRaises(ScoreFileError):
            parse_score_csv("i1\ns1,1\ns2,0\n")
        with self.assertRaises(ScoreFileError):
            parse_score_csv("i1,i2\ns1,1,0\n")
        with self.assertRaises(ScoreFileError):
            parse_score_csv("")

    def test_blank_rows_keep_row_numbers(self):
        """Test that blank lines are skipped but still counted"""
        with self.assertRaises(ScoreFileError) as ctx:
            parse_score_csv("i1,i2\n\ns1,1,0\ns2,0,x\n")
        self.assertEqual(ctx.exception.row, 4)

    def test_score_file_error_is_value_error(self):
        """Test that ScoreFileError can be handled as a ValueError"""
        self.assertTrue(issubclass(ScoreFileError, ValueError))


class TestLoadAndSerialize(unittest.TestCase):
    """Test cases for reading and writing score files"""

    def setUp(self):
        """Set up test fixtures"""
        self.text = "i1,i2,i3\n#max,5,1,2.5\ns1,2,1,2.5\ns2,0,0,1.25\n"

    def test_serialize_reproduces_file(self):
        """Test that a parsed file is written back unchanged"""
        self.assertEqual(serialize_score_csv(parse_score_csv(self.text)), self.text)

    def test_serialize_omits_unit_maxima(self):
        """Test that the #max row is only written when needed"""
        text = serialize_score_csv(parse_score_csv("i1,i2\ns1,1,0\ns2,0,1\n"))
        self.assertNotIn('#max', text)

    def test_load_score_file(self):
        """Test loading a UTF-8 file with a byte order mark"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'scores.csv')
            with open(path, 'w', encoding='utf-8-sig') as handle:
                handle.write(self.text)

            self.assertEqual(load_score_file(path), parse_score_csv(self.text))

    def test_load_missing_file(self):
        """Test that an unreadable file raises ScoreFileError"""
        with self.assertRaises(ScoreFileError):
            load_score_file(os.path.join(tempfile.gettempdir(), 'no_such_dir', 'scores.csv'))

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 15), st.integers(2, 10))
    @settings(max_examples=100, deadline=None)
    def test_random_round_trip(self, seed, n_examinees, n_items):
        """Test parse -> normalize -> serialize -> parse on random weighted scores"""
        rng = np.random.default_rng(seed)
        max_scores = rng.choice([1.0, 2.5, 4.0], size=n_items)
        scores = rng.random((n_examinees, n_items)) * max_scores
        scores[:, rng.random(n_items) < 0.5] = 0.0
        original = ScoreMatrix([f's{k}' for k in range(n_examinees)], [f'i{i}' for i in range(n_items)],
                               scores, max_scores)

        parsed = parse_score_csv(serialize_score_csv(original))
        normalized = normalize(parsed)
        reparsed = parse_score_csv(serialize_score_csv(normalized.to_score_matrix()))

        self.assertEqual(parsed, original)
        np.testing.assert_array_equal(normalize(reparsed).entries, normalized.entries)

    def test_quoted_ids(self):
        """Test that ids holding a comma are quoted and read back"""
        m = ScoreMatrix(['Doe, J', 's2'], ['q1', 'q,2'], [[1, 0], [0, 1]], [1, 1])
        text = serialize_score_csv(m)

        self.assertIn('"q,2"', text)
        self.assertEqual(parse_score_csv(text), m)


class TestNormalize(unittest.TestCase):
    """Test cases for normalize and total_scores"""

    def test_divides_by_maximum(self):
        """Test that scores are divided by the item maximum"""
        m = normalize(parse_score_csv("i1,i2\n#max,5,1\ns1,2,1\ns2,1,0\n"))

        self.assertAlmostEqual(m.entries[0, 0], 0.4)
        self.assertAlmostEqual(m.entries[1, 0], 0.2)
        self.assertAlmostEqual(m.entries[0, 1], 1.0)

    def test_totals(self):
        """Test normalized totals as item means"""
        scores = np.array([[1, 0, 1, 1], [1, 1, 1, 1]])
        m = normalize(ScoreMatrix(['a', 'b'], ['i1', 'i2', 'i3', 'i4'], scores, np.ones(4)))

        self.assertEqual(total_scores(m), [0.75, 1.0])

    def test_percentage_totals(self):
        """Test 40 items at 2.5 points each give percentages out of 100"""
        scores = np.full((2, 40), 2.5)
        scores[1, :10] = 0
        m = normalize(ScoreMatrix(['a', 'b'], [f'i{i}' for i in range(40)], scores, np.full(40, 2.5)))

        np.testing.assert_allclose(m.percentage_totals(), [100.0, 75.0])

    def test_subset_recomputes_totals(self):
        """Test that a subset keeps item order and averages over its own items"""
        scores = np.array([[1, 0, 1], [0, 1, 1]])
        m = normalize(ScoreMatrix(['a', 'b'], ['i1', 'i2', 'i3'], scores, np.ones(3)))
        sub = m.subset({'i3', 'i1'})

        self.assertEqual(sub.item_ids, ('i1', 'i3'))
        np.testing.assert_allclose(sub.totals, [1.0, 0.5])
        with self.assertRaises(ValueError):
            m.subset({'i9'})

    def test_matrices_are_read_only(self):
        """Test that score arrays cannot be modified in place"""
        m = parse_score_csv("i1,i2\ns1,1,0\ns2,0,1\n")
        with self.assertRaises(ValueError):
            m.scores[0, 0] = 0

    @given(arrays(np.int8, st.tuples(st.integers(2, 12), st.integers(2, 8)), elements=st.integers(0, 1)))
    @settings(max_examples=50, deadline=None)
    def test_normalize_idempotent_on_dichotomous(self, scores):
        """Test that normalizing 0/1 scores with unit maxima changes nothing"""
        k, n = scores.shape
        m = ScoreMatrix([f's{i}' for i in range(k)], [f'i{j}' for j in range(n)], scores, np.ones(n))
        normalized = normalize(m)

        np.testing.assert_array_equal(normalized.entries, m.scores)
        self.assertEqual(normalize(normalized.to_score_matrix()), normalized)


class TestConcatenate(unittest.TestCase):
    """Test cases for stacking groups"""

    def setUp(self):
        """Set up test fixtures"""
        self.a = normalize(parse_score_csv("i1,i2\ns1,1,0\ns2,0,1\n"))
        self.b = normalize(parse_score_csv("i2,i1\ns1,1,1\ns2,0,0\n"))

    def test_aligns_columns_and_prefixes_ids(self):
        """Test that columns are aligned to the first matrix"""
        pooled = concatenate([self.a, self.b], ['A', 'B'])

        self.assertIsInstance(pooled, NormalizedMatrix)
        self.assertEqual(pooled.examinee_ids, ('A/s1', 'A/s2', 'B/s1', 'B/s2'))
        self.assertEqual(pooled.item_ids, ('i1', 'i2'))
        np.testing.assert_array_equal(pooled.entries, [[1, 0], [0, 1], [1, 1], [0, 0]])

    def test_rejects_mismatched_items(self):
        """Test that groups over different items cannot be pooled"""
        other = normalize(parse_score_csv("i1,i3\ns1,1,0\ns2,0,1\n"))
        with self.assertRaises(ValueError):
            concatenate([self.a, other], ['A', 'B'])


if __name__ == '__main__':
    unittest.main()
