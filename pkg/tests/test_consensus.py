#!/usr/bin/env python3
"""
Unit tests for the consensus elimination loop and rescoring
"""

import math
import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add project root to path
current_dir = os.path.dirname(os.path.abspath(__file__))
project_root = os.path.dirname(current_dir)
sys.path.append(project_root)

from data.ingest import ScoreMatrix, normalize
from models.consensus import (ConsensusCollapseError, ConsensusConfig, ConsensusEngine, ConsensusError,
                              CutoffRule, detect_unfair, find_cutoff, is_below_floor, rescore)
from models.regression import DegenerateCohortError, ItemPoint
from tests.score_fixtures import IDEAL_COLUMN, exam_with_wrong_item, ideal_exam


class TestFindCutoff(unittest.TestCase):
    """Test cases for find_cutoff"""

    def test_zero_spread_hits_floor(self):
        """Test that an ideal exam gets the floor cutoff"""
        self.assertEqual(find_cutoff([0.0] * 10, ConsensusConfig()), 0.1)

    def test_fixed_rule(self):
        """Test the fixed cutoff"""
        cfg = ConsensusConfig(cutoff_rule=CutoffRule.FIXED, fixed_cutoff=0.2)
        self.assertEqual(find_cutoff([0.05, -0.4, 0.1], cfg), 0.2)

    def test_mad_rule(self):
        """Test the scaled MAD cutoff against a direct evaluation"""
        distances = [0.05, 0.02, -0.01, 0.03, -0.60]
        median = np.median(distances)
        mad = np.median(np.abs(np.array(distances) - median))
        expected = max(0.1, 3.0 * 1.4826 * mad)

        d_f = find_cutoff(distances, ConsensusConfig(mad_multiplier=3.0, cutoff_floor=0.1))
        self.assertAlmostEqual(d_f, expected, places=12)
        self.assertAlmostEqual(d_f, 0.133434, places=6)

    def test_too_few_distances(self):
        """Test that fewer than 3 distances cannot form a consensus"""
        with self.assertRaises(ConsensusError):
            find_cutoff([0.1, -0.2], ConsensusConfig())


class TestConsensusConfig(unittest.TestCase):
    """Test cases for ConsensusConfig"""

    def test_defaults(self):
        """Test default settings"""
        cfg = ConsensusConfig()

        self.assertEqual(cfg.cutoff_rule, CutoffRule.MAD_SCALED)
        self.assertEqual(cfg.mad_multiplier, 3.0)
        self.assertEqual(cfg.cutoff_floor, 0.1)
        self.assertEqual(cfg.fixed_cutoff, 0.2)
        self.assertIsNone(cfg.max_iterations)

    def test_from_dict(self):
        """Test building a config from a mapping"""
        cfg = ConsensusConfig.from_dict({'cutoff_rule': 'fixed', 'fixed_cutoff': 0.25, 'cutoff_floor': None})

        self.assertEqual(cfg.cutoff_rule, CutoffRule.FIXED)
        self.assertEqual(cfg.fixed_cutoff, 0.25)
        self.assertEqual(cfg.cutoff_floor, 0.1)
        self.assertEqual(ConsensusConfig.from_dict(cfg.to_dict()), cfg)

    def test_invalid_settings(self):
        """Test handling of invalid settings"""
        with self.assertRaises(ValueError):
            ConsensusConfig.from_dict({'threshold': 0.2})
        with self.assertRaises(ValueError):
            ConsensusConfig(cutoff_rule='median')
        with self.assertRaises(ValueError):
            ConsensusConfig(fixed_cutoff=0)
        with self.assertRaises(ValueError):
            ConsensusConfig(mad_multiplier=-1.0)
        with self.assertRaises(ValueError):
            ConsensusConfig(max_iterations=0)

    def test_string_settings(self):
        """Test that settings read from the environment as strings are parsed or rejected"""
        cfg = ConsensusConfig(mad_multiplier='2.5', cutoff_floor='0.05')

        self.assertEqual(cfg.mad_multiplier, 2.5)
        self.assertEqual(cfg.cutoff_floor, 0.05)
        with self.assertRaises(ValueError):
            ConsensusConfig(fixed_cutoff='abc')
        with self.assertRaises(ValueError):
            ConsensusConfig(mad_multiplier='nan')


class TestDetectUnfair(unittest.TestCase):
    """Test cases for the elimination loop"""

    def setUp(self):
        """Set up test fixtures"""
        self.engine = ConsensusEngine()

    def test_ideal_exam(self):
        """Test that an ideal exam has no unfair items and stops after one round"""
        result = self.engine.detect_unfair(normalize(ideal_exam()))

        self.assertEqual(len(result.iterations), 1)
        self.assertEqual(result.unfair_items, ())
        self.assertEqual(len(result.fair_items), 20)
        self.assertEqual(result.final_cutoff, 0.1)

    def test_all_wrong_item_removed(self):
        """Test that one item nobody answers is the only item removed"""
        m = normalize(exam_with_wrong_item())
        result = self.engine.detect_unfair(m)

        self.assertEqual(len(result.iterations), 2)
        self.assertEqual(result.iterations[0].removed, frozenset({'wrong'}))
        self.assertEqual(result.iterations[1].removed, frozenset())
        self.assertEqual([item_id for item_id, _ in result.unfair_items], ['wrong'])
        self.assertAlmostEqual(result.unfair_items[0][1], -1 / math.sqrt(2), places=12)

        # Single-pass check of the first round
        first = result.iterations[0]
        self.assertAlmostEqual(first.d_f, 0.1, places=12)
        for point in first.item_points:
            if point.item_id != 'wrong':
                self.assertAlmostEqual(point.d, 0.05 / math.sqrt(2), places=12)

    def test_rescored_totals_use_fair_items(self):
        """Test that final scores restore the original item weights"""
        m = normalize(exam_with_wrong_item())
        rescored = detect_unfair(m).rescored_totals

        self.assertEqual(rescored.max_score, 80.0)
        self.assertEqual(rescored.scores, tuple(float(20 * s) for s in IDEAL_COLUMN))
        self.assertAlmostEqual(rescored.percentages[4], 100.0)

    def test_max_iterations(self):
        """Test that the round limit is honored"""
        m = normalize(exam_with_wrong_item())
        result = detect_unfair(m, ConsensusConfig(max_iterations=1))

        self.assertEqual(len(result.iterations), 1)
        self.assertNotIn('wrong', result.fair_items)

    def test_round_limit_refits_survivors(self):
        """Test that the after-elimination sum is taken over the fair items refitted on their own"""
        m = normalize(ideal_exam(extra_columns={'w1': np.zeros(8), 'w2': np.zeros(8)}))
        result = detect_unfair(m, ConsensusConfig(max_iterations=1))

        self.assertEqual(result.iterations[0].removed, frozenset({'w1', 'w2'}))
        self.assertEqual(len(result.iterations[0].item_points), 22)
        self.assertEqual({point.item_id for point in result.survivor_points}, set(result.fair_items))
        self.assertEqual(len(result.survivor_points), 20)
        self.assertAlmostEqual(result.sum_positive_distances_before, 20 * 0.1 / math.sqrt(2), places=12)
        self.assertAlmostEqual(result.sum_positive_distances_after, 0.0, places=12)

    def test_survivor_points_match_last_round(self):
        """Test that a loop ending on its own reuses the last round's fits"""
        result = detect_unfair(normalize(exam_with_wrong_item()))
        self.assertEqual(result.survivor_points, result.iterations[-1].item_points)

    def test_collapse(self):
        """Test that eliminating all but two items raises ConsensusCollapseError"""
        scores = np.column_stack([IDEAL_COLUMN, IDEAL_COLUMN, np.zeros(8), np.zeros(8)])
        m = normalize(ScoreMatrix([f's{k}' for k in range(8)], ['a', 'b', 'c', 'd'], scores, np.full(4, 4.0)))

        with self.assertRaises(ConsensusCollapseError):
            detect_unfair(m, ConsensusConfig(cutoff_rule='fixed'))

    def test_too_few_items(self):
        """Test that fewer than 3 items raise ConsensusError"""
        m = normalize(ScoreMatrix(['s1', 's2'], ['a', 'b'], [[1, 0], [0, 1]], [1, 1]))
        with self.assertRaises(ConsensusError):
            detect_unfair(m)

    def test_degenerate_cohort(self):
        """Test that identical totals raise DegenerateCohortError"""
        m = normalize(ScoreMatrix(['s1', 's2', 's3'], ['a', 'b', 'c'], np.ones((3, 3)), np.ones(3)))
        with self.assertRaises(DegenerateCohortError):
            detect_unfair(m)

    def test_final_distances_come_from_last_round(self):
        """Test that removed items keep the distance of their removal round"""
        m = normalize(exam_with_wrong_item())
        result = detect_unfair(m)
        distances = result.final_distances()

        self.assertAlmostEqual(distances['wrong'], -1 / math.sqrt(2), places=12)
        self.assertAlmostEqual(distances['item_01'], 0.0, places=12)
        self.assertGreaterEqual(result.sum_positive_distances_before, result.sum_positive_distances_after)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(5, 40), st.integers(3, 15))
    @settings(max_examples=500, deadline=None)
    def test_termination_and_bookkeeping(self, seed, n_examinees, n_items):
        """Test that the loop ends within N rounds and partitions the items"""
        rng = np.random.default_rng(seed)
        scores = rng.integers(0, 2, size=(n_examinees, n_items))
        try:
            m = normalize(ScoreMatrix([f's{k}' for k in range(n_examinees)],
                                      [f'i{i}' for i in range(n_items)], scores, np.ones(n_items)))
            result = detect_unfair(m)
        except (DegenerateCohortError, ConsensusCollapseError):
            return

        self.assertLessEqual(len(result.iterations), n_items)
        removed = [iteration.removed for iteration in result.iterations]
        self.assertEqual(sum(len(r) for r in removed), len(frozenset().union(*removed)))

        unfair = {item_id for item_id, _ in result.unfair_items}
        self.assertFalse(unfair & result.fair_items)
        self.assertEqual(unfair | result.fair_items, set(m.item_ids))


class TestRescore(unittest.TestCase):
    """Test cases for rescore"""

    def test_all_fair_equals_raw_totals(self):
        """Test that rescoring with every item returns the raw totals"""
        m = ScoreMatrix(['a', 'b'], ['i1', 'i2', 'i3'], [[2, 1, 0], [5, 0, 1]], [5, 1, 1])
        rescored = rescore(m, {'i1', 'i2', 'i3'})

        self.assertEqual(rescored.scores, (3.0, 6.0))
        self.assertEqual(rescored.max_score, 7.0)

    def test_weighted_maximum(self):
        """Test 40 items at 2.5 points with 4 removed"""
        item_ids = [f'i{i}' for i in range(40)]
        m = ScoreMatrix(['a', 'b'], item_ids, np.full((2, 40), 2.5), np.full(40, 2.5))
        rescored = rescore(m, set(item_ids[4:]))

        self.assertEqual(rescored.max_score, 90.0)
        self.assertEqual(rescored.percentages, (100.0, 100.0))

    def test_correct_only_on_removed_items(self):
        """Test that credit on removed items disappears"""
        m = ScoreMatrix(['a', 'b'], ['i1', 'i2', 'i3'], [[1, 0, 0], [1, 1, 1]], np.ones(3))
        rescored = rescore(m, {'i2', 'i3'})

        self.assertEqual(rescored.scores, (0.0, 2.0))
        self.assertEqual(rescored.percentages, (0.0, 100.0))

    def test_invalid_fair_sets(self):
        """Test handling of empty or unknown fair sets"""
        m = ScoreMatrix(['a', 'b'], ['i1', 'i2'], [[1, 0], [0, 1]], np.ones(2))
        with self.assertRaises(ValueError):
            rescore(m, set())
        with self.assertRaises(ValueError):
            rescore(m, {'i9'})


class TestFloor(unittest.TestCase):
    """Test cases for is_below_floor"""

    def test_points_around_line_cd(self):
        """Test which points fall below b0 + b1 = 0"""
        self.assertFalse(is_below_floor(ItemPoint.from_fit('wrong', 0.0, 0.0, 0.0, 10)))
        self.assertFalse(is_below_floor(ItemPoint.from_fit('fair', 0.0, 1.0, 0.5, 10)))
        self.assertTrue(is_below_floor(ItemPoint.from_fit('odd', -0.3, 0.1, 0.05, 10)))


if __name__ == '__main__':
    unittest.main()
