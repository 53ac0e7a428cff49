from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Literal, Optional

from ..constants import CODING_CONFIGS, OBJECTIVES, QP_VALUES


class TrainingConfig(BaseModel):
    """Settings of a training run.

    objective accepts the short names 'abs' and 'rel'. max_iterations defaults to
    10 times the number of leaves. config_filter and qp_filter restrict training to
    records with matching metadata; by default all records are pooled.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    objective: Literal['absolute_lsq', 'relative_weighted_lsq'] = 'relative_weighted_lsq'
    lower_bound: Literal[0] = 0
    max_iterations: Optional[int] = Field(default=None, ge=1)
    convergence_tol: float = Field(default=1e-10, gt=0.0)
    seed: int = 0
    solver: Literal['active_set', 'trf'] = 'active_set'
    config_filter: Optional[str] = None
    qp_filter: Optional[int] = None

    @field_validator('objective', mode='before')
    @classmethod
    def _short_objective(cls, value):
        return OBJECTIVES.get(value, value)

    @field_validator('config_filter')
    @classmethod
    def _check_config(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in CODING_CONFIGS:
            raise ValueError(f'config_filter must be one of {CODING_CONFIGS}')
        return value

    @field_validator('qp_filter')
    @classmethod
    def _check_qp(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value not in QP_VALUES:
            raise ValueError(f'qp_filter must be one of {QP_VALUES}')
        return value

    def iterations_for(self, num_leaves: int) -> int:
        """Iteration cap for a problem with the given number of leaves"""
        return self.max_iterations if self.max_iterations is not None else 10 * max(num_leaves, 1)
