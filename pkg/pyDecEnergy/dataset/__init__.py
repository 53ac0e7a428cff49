from .BitstreamMeta import BitstreamMeta
from .FeatureVector import FeatureVector
from .SetupManifest import SetupManifest
from .EnergyDataset import EnergyDataset, EnergyRecord, SplitRule, split
from .DatasetFile import load_dataset, read_dataset, write_dataset

__all__ = ['BitstreamMeta', 'FeatureVector', 'SetupManifest', 'EnergyDataset', 'EnergyRecord',
           'SplitRule', 'split', 'load_dataset', 'read_dataset', 'write_dataset']
