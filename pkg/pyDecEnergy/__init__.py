from . import constants
from . import Exceptions_custom
from . import energy_helpers
from .catalog.FeatureDefinition import FeatureDefinition
from .catalog.FeatureCatalog import FeatureCatalog, build_catalog
from .dataset.BitstreamMeta import BitstreamMeta
from .dataset.FeatureVector import FeatureVector
from .dataset.SetupManifest import SetupManifest
from .dataset.EnergyDataset import EnergyDataset, SplitRule, split
from .dataset.DatasetFile import load_dataset, read_dataset, write_dataset
from .metadata.metadata import MetaData
from .model.EnergyModel import EnergyModel
from .model.metrics import energy_ratio_report, mean_estimation_error
from .trainer.TrainingConfig import TrainingConfig
from .trainer.Trainer import Trainer, train, train_validate
from .report.EvaluationReport import EvaluationReport
from .report.renderers import render_curve, render_table3, render_table4
from .bitdepth.FeatureGroup import FeatureGroup
from .bitdepth.ZetaSweep import ZetaSweepResult, sweep_zeta
from .bitdepth.PhiSearch import PhiSearchResult, search_phi, table1_phi
from .measurement.SimulatedDevice import MeasurementProtocolConfig, SimulatedDevice, simulate_measurement
from .measurement.SyntheticCorpus import CorpusSpec, generate_synthetic_corpus
from .pipeline.Pipeline import Pipeline, PipelineConfig, pipeline_run

from .version import __version__

__all__ = ['constants',
           'Exceptions_custom',
           'energy_helpers',
           'catalog',
           'dataset',
           'model',
           'trainer',
           'report',
           'bitdepth',
           'measurement',
           'pipeline',
           'BitstreamMeta',
           'CorpusSpec',
           'EnergyDataset',
           'EnergyModel',
           'EvaluationReport',
           'FeatureCatalog',
           'FeatureDefinition',
           'FeatureGroup',
           'FeatureVector',
           'MeasurementProtocolConfig',
           'MetaData',
           'PhiSearchResult',
           'Pipeline',
           'PipelineConfig',
           'SetupManifest',
           'SimulatedDevice',
           'SplitRule',
           'Trainer',
           'TrainingConfig',
           'ZetaSweepResult',
           'build_catalog',
           'energy_ratio_report',
           'generate_synthetic_corpus',
           'load_dataset',
           'mean_estimation_error',
           'pipeline_run',
           'read_dataset',
           'render_curve',
           'render_table3',
           'render_table4',
           'search_phi',
           'simulate_measurement',
           'split',
           'sweep_zeta',
           'table1_phi',
           'train',
           'train_validate',
           'write_dataset']
