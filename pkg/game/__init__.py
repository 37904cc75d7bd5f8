from .codes import GameCode, PlantedCode, adapt
from .estimation import clopper_pearson, estimate_fool
from .games import c_secure_game, one_time_game, play_round, priv_ldc_game, rb_residual, win_rate

__all__ = ['GameCode', 'PlantedCode', 'adapt', 'clopper_pearson', 'estimate_fool', 'c_secure_game',
           'one_time_game', 'play_round', 'priv_ldc_game', 'rb_residual', 'win_rate']
