from .evaluate import eval_posterior, full_bayes, heldout_scorer, rank_space, score_log_pred
from .walk import initial_state, run, step
