from .bch import ShortenedBCH, block_code
from .local_codes import HadamardCode, decode_all, hadamard_encode, hadamard_local_decode
from .oracle import CallbackOracle, CountingView, QueryOracle
from .private_ldc import KeyedDecoder, PrivateLDC, PrivateSession, gen

__all__ = ['ShortenedBCH', 'block_code', 'HadamardCode', 'decode_all', 'hadamard_encode',
           'hadamard_local_decode', 'CallbackOracle', 'CountingView', 'QueryOracle', 'KeyedDecoder', 'PrivateLDC',
           'PrivateSession', 'gen']
