from .EnergyModel import EnergyModel
from .metrics import EstimationError, RatioReport, energy_ratio_report, mean_estimation_error

__all__ = ['EnergyModel', 'EstimationError', 'RatioReport', 'energy_ratio_report', 'mean_estimation_error']
