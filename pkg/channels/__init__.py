from .channels import (bursty_flip, identity, key_aware_block_attack, lift_to_insdel, random_flip,
                       random_insdel, zero_run_killer)
from .metering import CostMeter, MeterSnapshot, OracleRegistry, safe_function_delta, safe_function_eval

__all__ = ['bursty_flip', 'identity', 'key_aware_block_attack', 'lift_to_insdel', 'random_flip',
           'random_insdel', 'zero_run_killer', 'CostMeter', 'MeterSnapshot', 'OracleRegistry',
           'safe_function_delta', 'safe_function_eval']
