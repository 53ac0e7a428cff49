from .Pipeline import (DatasetSource, Pipeline, PipelineConfig, PipelineResult, exit_code_for,
                       pipeline_run)

__all__ = ['DatasetSource', 'Pipeline', 'PipelineConfig', 'PipelineResult', 'exit_code_for', 'pipeline_run']
