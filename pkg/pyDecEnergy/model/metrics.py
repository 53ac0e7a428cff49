import math
import numpy as np
import numpy.typing as npt
import pandas as pd   # type: ignore

from typing import Dict, NamedTuple, Optional, Tuple, TYPE_CHECKING

from ..constants import ID_COLUMN
from ..energy_helpers import mean_abs_relative
from ..Exceptions_custom import EmptyDatasetError, InvalidValueError, UnpairableRecordError

if TYPE_CHECKING:
    from .EnergyModel import EnergyModel
    from ..dataset.EnergyDataset import EnergyDataset


class EstimationError(NamedTuple):
    """Mean estimation error and the per-record residuals it was computed from"""

    mean_error: float
    residuals: pd.DataFrame

    @property
    def percent(self) -> float:
        return 100.0 * self.mean_error


class RatioReport(NamedTuple):
    """Paired comparison of 8-bit and 10-bit decoding energies"""

    pairs: pd.DataFrame
    minimum: float
    maximum: float
    mean: float

    def scatter(self) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """(E_8bit, E_10bit) arrays for plotting"""
        return self.pairs['energy8'].to_numpy(), self.pairs['energy10'].to_numpy()

    def summary(self) -> str:
        return (f'{len(self.pairs)} pairs; E10/E8 min {self.minimum:.4f}, max {self.maximum:.4f}, '
                f'mean {self.mean:.4f} (10-bit needs {100.0 * (self.mean - 1.0):.2f}% more energy)')


def relative_errors(estimates: npt.ArrayLike, measured: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Per-record (estimate - measured) / measured"""

    measured = np.asarray(measured, dtype=np.float64)
    return (np.asarray(estimates, dtype=np.float64) - measured) / measured


def mean_estimation_error(model: 'EnergyModel',
                          dataset: 'EnergyDataset',
                          scaled: bool = False,
                          zeta: Optional[float] = None,
                          phi: Optional[npt.ArrayLike] = None) -> EstimationError:
    """Mean of the absolute relative estimation errors over a dataset.

    :param model: Energy model
    :param dataset: Dataset aligned to the model's catalog
    :param scaled: Use the bit-depth scaled estimate
    :param zeta: Override of the model's scaling factor (scaled only)
    :param phi: Override of the model's bit-depth flags (scaled only)

    :returns: EstimationError with the mean as a fraction and a residual table
        (id, measured, estimated, relative_error)

    :raises EmptyDatasetError: if the dataset has no records
    :raises InvalidValueError: if a measured energy is not positive
    """

    if dataset.size == 0:
        raise EmptyDatasetError(f'{dataset.name}: no records')

    measured = dataset.energies
    if np.any(~(measured > 0)):
        raise InvalidValueError(f'{dataset.name}: measured energy must be positive')

    estimates = model.estimate_dataset(dataset, scaled=scaled, zeta=zeta, phi=phi)

    residuals = pd.DataFrame({ID_COLUMN: dataset.ids,
                              'measured': measured,
                              'estimated': estimates,
                              'relative_error': relative_errors(estimates, measured)})

    return EstimationError(mean_error=mean_abs_relative(estimates, measured), residuals=residuals)


def energy_ratio_report(dataset8: 'EnergyDataset', dataset10: 'EnergyDataset') -> RatioReport:
    """Pair records of two datasets and report E_10bit / E_8bit.

    Records pair on (sequence, format, qp, config), which must match exactly and
    identify one record on each side.

    :param dataset8: 8-bit dataset
    :param dataset10: 10-bit dataset

    :returns: RatioReport

    :raises UnpairableRecordError: if a record has no partner or a key is not unique
    :raises EmptyDatasetError: if there are no records
    """

    if dataset8.size == 0 or dataset10.size == 0:
        raise EmptyDatasetError('no records to pair')

    def by_key(ds: 'EnergyDataset') -> Dict[tuple, int]:
        keys: Dict[tuple, int] = {}
        ids = ds.ids
        for idx in range(ds.size):
            key = ds.record_meta(idx).pairing_key
            if key in keys:
                raise UnpairableRecordError(f'{ds.name}: records {ids[keys[key]]} and {ids[idx]} '
                                            f'share the pairing key {key}')
            keys[key] = idx
        return keys

    keys8 = by_key(dataset8)
    keys10 = by_key(dataset10)
    ids8 = dataset8.ids
    ids10 = dataset10.ids

    for key, idx in keys8.items():
        if key not in keys10:
            raise UnpairableRecordError(f'{dataset8.name}: record {ids8[idx]} has no partner '
                                        f'in {dataset10.name} (key {key})')
    for key, idx in keys10.items():
        if key not in keys8:
            raise UnpairableRecordError(f'{dataset10.name}: record {ids10[idx]} has no partner '
                                        f'in {dataset8.name} (key {key})')

    records = []
    for key, idx8 in keys8.items():
        idx10 = keys10[key]
        e8 = float(dataset8.energies[idx8])
        e10 = float(dataset10.energies[idx10])
        records.append([key[0], key[1], key[2], key[3], ids8[idx8], ids10[idx10],
                        e8, e10, e10 / e8])

    pairs = pd.DataFrame.from_records(records, columns=['sequence', 'format', 'qp', 'config', 'id8', 'id10',
                                                        'energy8', 'energy10', 'ratio'])
    ratios = pairs['ratio'].tolist()

    return RatioReport(pairs=pairs, minimum=min(ratios), maximum=max(ratios),
                       mean=math.fsum(ratios) / len(ratios))

