import pandas as pd   # type: ignore

from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union, TYPE_CHECKING

from ..constants import COMMENT_CHAR
from ..energy_helpers import comment_lines, float_to_str

if TYPE_CHECKING:
    from ..model.EnergyModel import EnergyModel

REPORT_CSV_HDR = ['training_setup', 'validation_setup', 'column', 'mean_error', 'mean_error_percent',
                  'cross_bit_depth']


class ReportRow(NamedTuple):
    """One mean estimation error: a validation setup evaluated for one column (model variant or zeta)"""

    validation_setup: str
    column: str
    mean_error: float
    cross_bit_depth: bool = False


class EvaluationReport(object):
    """Mean estimation errors of models trained on one setup and validated on others.
    """

    def __init__(self, training_setup: str,
                 rows: Optional[List[ReportRow]] = None,
                 provenance: Optional[Dict[str, Any]] = None):
        """Create a report.

        :param training_setup: Name of the training setup
        :param rows: Initial rows
        :param provenance: Settings, seeds and input hashes needed to rerun the evaluation
        """

        self.__training_setup = training_setup
        self.__rows: List[ReportRow] = []
        self.__residuals: Dict[Tuple[str, str], pd.DataFrame] = {}
        self.__models: Dict[str, 'EnergyModel'] = {}
        self.__provenance: Dict[str, Any] = {} if provenance is None else dict(provenance)

        for row in rows or []:
            self.add_row(row)

    def __len__(self) -> int:
        return len(self.__rows)

    @property
    def training_setup(self) -> str:
        return self.__training_setup

    @property
    def rows(self) -> List[ReportRow]:
        return list(self.__rows)

    @property
    def residuals(self) -> Dict[Tuple[str, str], pd.DataFrame]:
        """Per-record residual tables keyed by (validation_setup, column)"""
        return self.__residuals

    @property
    def models(self) -> Dict[str, 'EnergyModel']:
        """Trained models keyed by column"""
        return self.__models

    @property
    def provenance(self) -> Dict[str, Any]:
        return self.__provenance

    @property
    def columns(self) -> List[str]:
        """Columns in order of first appearance"""
        return list(dict.fromkeys(row.column for row in self.__rows))

    @property
    def validation_setups(self) -> List[str]:
        """Validation setups in order of first appearance"""
        return list(dict.fromkeys(row.validation_setup for row in self.__rows))

    def add_row(self, row: ReportRow, residuals: Optional[pd.DataFrame] = None):
        """Append a row.

        :raises ValueError: if the error is negative or the (setup, column) cell already exists
        """

        if not row.mean_error >= 0.0:
            raise ValueError(f'{row.validation_setup}/{row.column}: mean error must be nonnegative')
        if self.get_row(row.validation_setup, row.column) is not None:
            raise ValueError(f'{row.validation_setup}/{row.column}: cell already in report')

        self.__rows.append(row)
        if residuals is not None:
            self.__residuals[(row.validation_setup, row.column)] = residuals

    def add_model(self, column: str, model: 'EnergyModel'):
        self.__models[column] = model

    def get_row(self, validation_setup: str, column: str) -> Optional[ReportRow]:
        for row in self.__rows:
            if row.validation_setup == validation_setup and row.column == column:
                return row
        return None

    def cell(self, validation_setup: str, column: str) -> float:
        """Mean error of a cell.

        :raises KeyError: if the cell does not exist
        """

        row = self.get_row(validation_setup, column)
        if row is None:
            raise KeyError(f'No cell ({validation_setup}, {column}) in report')
        return row.mean_error

    def to_dataframe(self) -> pd.DataFrame:
        records = [[self.__training_setup, row.validation_setup, row.column, row.mean_error,
                    100.0 * row.mean_error, row.cross_bit_depth] for row in self.__rows]
        return pd.DataFrame.from_records(records, columns=REPORT_CSV_HDR)

    def to_csv(self, provenance: Optional[List[str]] = None) -> str:
        """Machine-readable report; errors as fractions at full precision"""

        outstr = '' if provenance is None else comment_lines(provenance)
        outstr += ','.join(REPORT_CSV_HDR) + '\n'
        for row in self.__rows:
            outstr += ','.join([self.__training_setup, row.validation_setup, row.column,
                                float_to_str(row.mean_error), f'{100.0 * row.mean_error:.2f}',
                                str(row.cross_bit_depth).lower()]) + '\n'
        return outstr

    def write_csv(self, filename: Union[str, Path], provenance: Optional[List[str]] = None):
        with open(filename, 'w') as fh:
            fh.write(self.to_csv(provenance))

    @classmethod
    def read_csv(cls, filename: Union[str, Path]) -> List['EvaluationReport']:
        """Read a report CSV; one report per training setup in order of appearance"""

        df = pd.read_csv(filename, comment=COMMENT_CHAR, dtype=str, keep_default_na=False)

        reports: Dict[str, EvaluationReport] = {}
        for _, rec in df.iterrows():
            tsetup = rec['training_setup']
            if tsetup not in reports:
                reports[tsetup] = cls(tsetup)
            reports[tsetup].add_row(ReportRow(validation_setup=rec['validation_setup'], column=rec['column'],
                                              mean_error=float(rec['mean_error']),
                                              cross_bit_depth=rec['cross_bit_depth'] == 'true'))
        return list(reports.values())
