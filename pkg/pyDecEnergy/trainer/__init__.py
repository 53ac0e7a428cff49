from .TrainingConfig import TrainingConfig
from .Trainer import Trainer, check_disjoint, train, train_validate

__all__ = ['TrainingConfig', 'Trainer', 'check_disjoint', 'train', 'train_validate']
