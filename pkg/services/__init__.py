from .calibration_service import CalibrationService, closure_overhead
from .experiment_service import ExperimentService, build_code

__all__ = ['CalibrationService', 'closure_overhead', 'ExperimentService', 'build_code']
