from .data_models import (BitString, CompilerGuarantee, CompilerParams, ComposedParams, CostBudget,
                          InnerCodeSpec, LocalCodeSpec, PrivateCodeParams, SafeFunctionSpec, SecretKey,
                          SymbolString)
from .reports import ExperimentConfig, FoolVerdict, GameReport, RoundRecord

__all__ = ['BitString', 'CompilerGuarantee', 'CompilerParams', 'ComposedParams', 'CostBudget',
           'InnerCodeSpec', 'LocalCodeSpec', 'PrivateCodeParams', 'SafeFunctionSpec', 'SecretKey',
           'SymbolString', 'ExperimentConfig', 'FoolVerdict', 'GameReport', 'RoundRecord']
