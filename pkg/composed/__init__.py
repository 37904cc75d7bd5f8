from .private_insdel import PrivateInsdelCode, dec_fin, encode_fin, eps_fin_of, gen_fin
from .resource_bounded import (ResourceBoundedCode, kdf, rb_hamming_decode, rb_hamming_encode,
                               rb_insdel_decode, rb_insdel_encode)

__all__ = ['PrivateInsdelCode', 'dec_fin', 'encode_fin', 'eps_fin_of', 'gen_fin', 'ResourceBoundedCode',
           'kdf', 'rb_hamming_decode', 'rb_hamming_encode', 'rb_insdel_decode', 'rb_insdel_encode']
