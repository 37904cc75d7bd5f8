from .container import ContainerHeader, read_container, write_container
from .inner_code import crc8, inner_decode, inner_encode, manchester
from .insdel_compiler import (compile, decompile, make_compiler_params, recover, recover_all,
                              recover_traced)

__all__ = ['ContainerHeader', 'read_container', 'write_container', 'crc8', 'inner_decode', 'inner_encode',
           'manchester', 'compile', 'decompile', 'make_compiler_params', 'recover', 'recover_all',
           'recover_traced']
