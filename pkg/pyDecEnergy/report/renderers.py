import numpy as np
import numpy.typing as npt

from typing import List, Optional, Sequence, Union, TYPE_CHECKING

from .EvaluationReport import EvaluationReport, ReportRow
from ..constants import COMMENT_CHAR, CURVE_PERCENT_HDR
from ..model.metrics import mean_estimation_error

if TYPE_CHECKING:
    from ..bitdepth.ZetaSweep import ZetaSweepResult
    from ..dataset.EnergyDataset import EnergyDataset
    from ..model.EnergyModel import EnergyModel

SETUP_WIDTH = 16
CELL_WIDTH = 10
CROSS_FLAG = ' *'
CROSS_NOTE = '* cross-bit-depth evaluation'


def format_percent(fraction: float) -> str:
    """Fraction as a percentage with 2 decimals, e.g. 0.0648 -> '6.48%'"""
    return f'{100.0 * fraction:.2f}%'


def _render_table(reports: Sequence[EvaluationReport], title: str,
                  default_columns: List[str], column_label=lambda cc: cc) -> str:
    outstr = ''

    for report in reports:
        columns = report.columns or default_columns
        setups = report.validation_setups
        swidth = max([SETUP_WIDTH] + [len(ss) + 2 for ss in setups])

        outstr += f'{title} (training: {report.training_setup})\n'
        outstr += f'{"validation setup":<{swidth}}'
        outstr += ''.join(f'{column_label(cc):>{CELL_WIDTH}}{"":{len(CROSS_FLAG)}}' for cc in columns).rstrip()
        outstr += '\n'

        any_cross = False
        for setup in setups:
            line = f'{setup:<{swidth}}'
            for col in columns:
                row: Optional[ReportRow] = report.get_row(setup, col)
                if row is None:
                    line += f'{"-":>{CELL_WIDTH}}{"":{len(CROSS_FLAG)}}'
                    continue
                flag = CROSS_FLAG if row.cross_bit_depth else ' ' * len(CROSS_FLAG)
                any_cross = any_cross or row.cross_bit_depth
                line += f'{format_percent(row.mean_error):>{CELL_WIDTH}}{flag}'
            outstr += line.rstrip() + '\n'

        if any_cross:
            outstr += f'{CROSS_NOTE}\n'
        outstr += '\n'

    return outstr.rstrip('\n') + '\n' if outstr else ''


def render_table3(reports: Union[EvaluationReport, Sequence[EvaluationReport]]) -> str:
    """Fixed-width table of mean estimation errors per validation setup and model variant.

    One block per training setup; cross-bit-depth cells are flagged with '*'.

    :param reports: One report or a list of reports (one per training setup)

    :returns: Table text
    """

    if isinstance(reports, EvaluationReport):
        reports = [reports]
    return _render_table(reports, 'Mean estimation error', ['FA', 'FU'])


def zeta_column(zeta: float) -> str:
    """Report column name of a zeta value"""
    return f'zeta={zeta:g}'


def evaluate_zeta_columns(model8: 'EnergyModel',
                          phi: npt.ArrayLike,
                          validation_sets: Sequence['EnergyDataset'],
                          zetas: Sequence[float] = (0.0, 0.66)) -> EvaluationReport:
    """Mean estimation error of the scaled 8-bit model for a few zeta values.

    :param model8: Model trained on 8-bit data
    :param phi: Bit-depth flags
    :param validation_sets: 10-bit validation datasets
    :param zetas: Zeta values, one report column each

    :returns: EvaluationReport with one column per zeta
    """

    report = EvaluationReport(model8.training_setup or 'model',
                              provenance={'zetas': [float(zz) for zz in zetas],
                                          'phi': ''.join(str(int(xx)) for xx in np.asarray(phi).tolist())})

    for vset in validation_sets:
        vdata = vset.project(model8.catalog)
        cross = vset.bit_depth is not None and model8.bit_depth is not None and vset.bit_depth != model8.bit_depth
        for zz in zetas:
            err = mean_estimation_error(model8, vdata, scaled=True, zeta=float(zz), phi=phi)
            report.add_row(ReportRow(validation_setup=vset.name, column=zeta_column(float(zz)),
                                     mean_error=err.mean_error, cross_bit_depth=cross),
                           residuals=err.residuals)
    return report


def render_table4(report: EvaluationReport) -> str:
    """Fixed-width table of the scaled model's errors per validation setup and zeta"""
    return _render_table([report], 'Mean estimation error of the bit-depth scaled model',
                         [zeta_column(0.0), zeta_column(0.66)])


def _zeta_decimals(grid: npt.NDArray[np.float64]) -> int:
    for ndec in range(2, 13):
        if np.all(np.round(grid, ndec) == grid):
            return ndec
    return 12


def render_curve(sweep: 'ZetaSweepResult') -> str:
    """Curve text: zeta,mean_error_percent rows and a trailing argmin comment.

    Zeta is printed with 2 decimals (more if the grid needs them) and errors as
    percentages with 2 decimals.

    :param sweep: Sweep result

    :returns: CSV text
    """

    ndec = _zeta_decimals(sweep.grid)
    outstr = f'{CURVE_PERCENT_HDR}\n'
    for zz, ee in zip(sweep.grid.tolist(), sweep.errors.tolist()):
        outstr += f'{zz:.{ndec}f},{100.0 * ee:.2f}\n'

    zmin, emin = sweep.argmin
    outstr += f'{COMMENT_CHAR} argmin zeta={zmin:.{ndec}f}, error={format_percent(emin)}\n'
    return outstr
