
class CatalogError(Exception):
    """Raised when an operation is used with the wrong catalog variant"""
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class AlignmentError(Exception):
    """Raised when a vector, model or dataset is not aligned to the expected catalog"""
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class DatasetError(Exception):
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class EmptyDatasetError(DatasetError):
    pass

class MissingEnergyError(DatasetError):
    pass

class OrphanEnergyError(DatasetError):
    pass

class UnknownFeatureError(DatasetError):
    pass

class MissingFeatureError(DatasetError):
    pass

class NegativeCountError(DatasetError):
    pass

class DuplicateIdError(DatasetError):
    pass

class InvalidValueError(DatasetError):
    pass

class UnpairableRecordError(DatasetError):
    pass

class SplitError(Exception):
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class OverlapError(Exception):
    """Training and validation data share bit streams"""
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class GroupPartitionError(Exception):
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class ConvergenceError(Exception):
    def __init__(self, err_args):
        Exception.__init__(self, err_args)
        self.errArgs = err_args

class PipelineError(Exception):
    """Pipeline stage failure"""
    def __init__(self, stage, err_args):
        Exception.__init__(self, f'{stage}: {err_args}')
        self.stage = stage
        self.errArgs = err_args
