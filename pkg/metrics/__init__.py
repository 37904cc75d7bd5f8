from .distances import edit_fractional, edit_raw, hamming_fractional, hamming_raw, lcs_length
from .runs import long_zero_runs, max_zero_run, zero_runs

__all__ = ['edit_fractional', 'edit_raw', 'hamming_fractional', 'hamming_raw', 'lcs_length',
           'long_zero_runs', 'max_zero_run', 'zero_runs']
