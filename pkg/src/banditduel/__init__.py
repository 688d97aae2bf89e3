"""Two-player one-armed bandit games: indices, thresholds, exact evaluation and solvers."""

from .errors import DegeneratePriorError, DomainError, ImpossibleEvidenceError, LPError, NodeBudgetExceeded
from .game import EvalResult, GameConfig, History, Strategy, best_response, evaluate_profile, first_exploration_stats
from .gittins import gittins_discounted, gittins_finite, single_player_value
from .priors import Beta, FiniteSupport, expected_best_mean, moments, update
from .thresholds import neutral_decay_bound, thresholds, uniform_net_gain_bounds

__version__ = "0.1.0"
