from .SimulatedDevice import MeasurementProtocolConfig, MeasurementResult, SimulatedDevice, simulate_measurement
from .SyntheticCorpus import (CorpusSpec, GroundTruth, generate_paired_corpora, generate_synthetic_corpus,
                              zeta_for_ratio)

__all__ = ['MeasurementProtocolConfig', 'MeasurementResult', 'SimulatedDevice', 'simulate_measurement',
           'CorpusSpec', 'GroundTruth', 'generate_paired_corpora', 'generate_synthetic_corpus', 'zeta_for_ratio']
