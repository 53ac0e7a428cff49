import numpy as np
import numpy.typing as npt

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from rich.console import Console
from rich import pretty

from ..constants import COMMENT_CHAR, CURVE_HDR, CURVE_PERCENT_HDR
from ..dataset.EnergyDataset import EnergyDataset
from ..energy_helpers import comment_lines, float_to_str, mean_abs_relative, parse_zeta_grid
from ..Exceptions_custom import EmptyDatasetError
from ..model.EnergyModel import EnergyModel

pretty.install()
con = Console()


class ZetaSweepResult(object):
    """Mean estimation error as a function of the scaling factor zeta.
    """

    def __init__(self, grid: npt.ArrayLike, errors: npt.ArrayLike):
        """Create a sweep result.

        :param grid: Zeta values
        :param errors: Mean estimation error (fraction) at each grid value

        :raises ValueError: if the grid is empty or the lengths differ
        """

        self.__grid = np.array(grid, dtype=np.float64)
        self.__errors = np.array(errors, dtype=np.float64)

        if self.__grid.size == 0:
            raise ValueError('Zeta grid is empty')
        if self.__grid.shape != self.__errors.shape:
            raise ValueError(f'{self.__grid.size} grid values but {self.__errors.size} errors')

        self.__grid.flags.writeable = False
        self.__errors.flags.writeable = False

    def __len__(self) -> int:
        return self.__grid.size

    @property
    def grid(self) -> npt.NDArray[np.float64]:
        return self.__grid

    @property
    def errors(self) -> npt.NDArray[np.float64]:
        return self.__errors

    @property
    def argmin_index(self) -> int:
        """Index of the smallest error; the first one on ties"""
        return int(np.argmin(self.__errors))

    @property
    def argmin(self) -> Tuple[float, float]:
        """(zeta*, error*)"""
        idx = self.argmin_index
        return float(self.__grid[idx]), float(self.__errors[idx])

    def error_at(self, zeta: float) -> float:
        """Error at a grid value.

        :raises KeyError: if zeta is not on the grid
        """

        pos = np.flatnonzero(self.__grid == zeta)
        if pos.size == 0:
            raise KeyError(f'zeta={zeta} is not on the grid')
        return float(self.__errors[pos[0]])


def sweep_zeta(model8: EnergyModel,
               phi: npt.ArrayLike,
               validation10: EnergyDataset,
               grid: Union[str, Sequence[float], None] = None,
               verbose: Optional[bool] = False) -> ZetaSweepResult:
    """Mean estimation error of the bit-depth scaled model for each zeta on a grid.

    :param model8: Model trained on 8-bit data
    :param phi: Binary bit-depth flags aligned to the model's catalog
    :param validation10: 10-bit validation dataset
    :param grid: Zeta grid ('start:stop:step', values, or None for 0:1.5:0.01)
    :param verbose: Output additional information

    :returns: ZetaSweepResult

    :raises ValueError: if the grid is empty or has negative values
    :raises EmptyDatasetError: if the validation dataset has no records
    """

    zetas = parse_zeta_grid(grid)
    if zetas.size == 0:
        raise ValueError('Zeta grid is empty')
    if validation10.size == 0:
        raise EmptyDatasetError(f'{validation10.name}: no records')

    phi_arr = np.asarray(phi)
    measured = validation10.energies
    errors = [mean_abs_relative(model8.estimate_dataset(validation10, scaled=True, zeta=float(zz), phi=phi_arr),
                                measured)
              for zz in zetas]

    result = ZetaSweepResult(zetas, errors)

    if verbose:
        zmin, emin = result.argmin
        con.print(f'{validation10.name}: {zetas.size} zeta values, minimum {100.0 * emin:.2f}% at zeta={zmin:g}')

    return result


def write_curve(sweep: ZetaSweepResult, filename: Union[str, Path], provenance: Optional[List[str]] = None):
    """Write the machine-readable curve file (zeta,mean_error at full precision)"""

    with open(filename, 'w') as fh:
        if provenance is not None:
            fh.write(comment_lines(provenance))
        fh.write(f'{CURVE_HDR}\n')
        for zz, ee in zip(sweep.grid.tolist(), sweep.errors.tolist()):
            fh.write(f'{float_to_str(zz)},{float_to_str(ee)}\n')


def read_curve(source: Union[str, Path]) -> ZetaSweepResult:
    """Read a curve file or rendered curve text.

    Accepts both the machine-readable form (zeta,mean_error) and the rendered form
    (zeta,mean_error_percent); percentages are converted to fractions.

    :param source: Filename or the curve text itself
    """

    if isinstance(source, Path) or '\n' not in str(source):
        with open(source, 'r') as fh:
            text = fh.read()
    else:
        text = str(source)

    lines = [ll.strip() for ll in text.splitlines() if ll.strip() != '' and not ll.startswith(COMMENT_CHAR)]
    if len(lines) == 0 or lines[0] not in (CURVE_HDR, CURVE_PERCENT_HDR):
        raise ValueError(f'Curve must start with {CURVE_HDR} or {CURVE_PERCENT_HDR}')

    divisor = 100.0 if lines[0] == CURVE_PERCENT_HDR else 1.0
    grid = []
    errors = []
    for line in lines[1:]:
        zz, ee = line.split(',')
        grid.append(float(zz))
        errors.append(float(ee) / divisor)

    return ZetaSweepResult(grid, errors)
