# Unfair Item Analysis Configuration

import os

from dotenv import load_dotenv

load_dotenv()

# Consensus (unfair item elimination) defaults; env strings are validated by ConsensusConfig
CONSENSUS_CONFIG = {
    'cutoff_rule': os.getenv('UNFAIR_ITEMS_CUTOFF_RULE', 'mad_scaled'),
    'mad_multiplier': os.getenv('UNFAIR_ITEMS_MAD_MULTIPLIER', 3.0),
    'cutoff_floor': os.getenv('UNFAIR_ITEMS_CUTOFF_FLOOR', 0.1),
    'fixed_cutoff': os.getenv('UNFAIR_ITEMS_FIXED_CUTOFF', 0.2),
    'max_iterations': None  # None means N, the number of items
}

# MAD consistency constant for a normal reference distribution
MAD_CONSISTENCY_CONSTANT = 1.4826

# Difficulty bands on the regression slope b1
DIFFICULTY_BANDS = {
    'edges': (0.5, 1.5),
    'labels': ('trivial/easy', 'moderate', 'hard')
}

# Region styles for the b0-b1 plane
REGION_STYLES = {
    'Fair': {'color': 'green', 'description': 'fair for both criteria'},
    'ProposedOnly': {'color': 'orange', 'description': 'unfair by distance only'},
    'Both': {'color': 'red', 'description': 'unfair by distance and correlation'},
    'TraditionalOnly': {'color': 'blue', 'description': 'unfair by correlation only'}
}

# Synthetic exam generation
GENERATOR_CONFIG = {
    'scaling_constant': 1.701,
    'theta_low': -3.0,
    'theta_high': 3.0,
    'theta_distribution': 'uniform',
    'seed': 42,
    'examinee_id_format': 's{:04d}',
    'item_id_format': 'item_{:02d}'
}

# Detection experiment (Monte Carlo recall / false positive control)
EXPERIMENT_CONFIG = {
    'n_items': 40,
    'n_examinees': 250,
    'a_range': (0.7, 1.6),
    'b_range': (-2.0, 2.0),
    'c_range': (0.0, 0.25),
    'n_unfair': 4,
    'unfair_cap': 0.45,
    'seeds': tuple(range(20)),
    'n_jobs': os.getenv('UNFAIR_ITEMS_N_JOBS', 1)
}

# Report output
REPORT_CONFIG = {
    'json_file': 'report.json',
    'text_file': 'report.txt',
    'plane_iteration_file': 'plane_iter{}.svg',
    'plane_final_file': 'plane_final.svg',
    'groups_file': 'groups.json',
    'json_indent': 2,
    'pooled_label': 'all groups',
    'svg_size': (600, 600),
    'svg_margin': 50,
    'svg_padding': 0.1,
    'svg_point_radius': 4,
    'svg_precision': 2
}

# Logging Configuration
LOGGING_CONFIG = {
    'level': os.getenv('UNFAIR_ITEMS_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
}
