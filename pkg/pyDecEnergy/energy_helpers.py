from typing import Iterator, List, Sequence, Union

import decimal
import hashlib
import math
import numpy as np
import numpy.typing as npt

from pathlib import Path

from .constants import COMMENT_CHAR, ZETA_GRID_DEFAULT


def float_to_str(f: float) -> str:
    """Convert the given float to a string, without resorting to scientific notation.

    The digits are those of repr(f), so float(float_to_str(f)) == f.

    :param f: Number

    :returns: String representation of the float
    """

    # From: https://stackoverflow.com/questions/38847690/convert-float-to-string-without-scientific-notation-and-false-precision
    ctx = decimal.Context()

    # repr never needs more than 17 significant digits
    ctx.prec = 20

    d1 = ctx.create_decimal(repr(float(f)))
    return format(d1, 'f')


def get_file_iter(filename: Union[str, Path], skip_comments: bool = True) -> Iterator[str]:
    """Reads a file and returns an iterator to the lines.

    :param filename: Name of the file
    :param skip_comments: Drop lines starting with the comment character

    :returns: Iterator of lines without line endings
    """

    with open(filename, 'r') as infile:
        rawdata = infile.read().splitlines()

    if skip_comments:
        rawdata = [ll for ll in rawdata if not ll.startswith(COMMENT_CHAR)]

    return iter(rawdata)


def file_sha256(filename: Union[str, Path]) -> str:
    """Return the SHA-256 hex digest of a file's contents"""

    hsh = hashlib.sha256()
    with open(filename, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b''):
            hsh.update(chunk)
    return hsh.hexdigest()


def text_sha256(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def fsum_dot(counts: npt.ArrayLike, coefficients: npt.ArrayLike) -> float:
    """Dot product accumulated in canonical order with compensated summation.

    :param counts: Feature counts
    :param coefficients: Energy coefficients

    :returns: Correctly rounded sum of the element-wise products
    """

    prods = np.asarray(counts, dtype=np.float64) * np.asarray(coefficients, dtype=np.float64)
    return math.fsum(prods.tolist())


def fsum_rows(matrix: npt.NDArray, coefficients: npt.NDArray) -> npt.NDArray[np.float64]:
    """Row-wise fsum_dot for a count matrix"""

    prods = np.asarray(matrix, dtype=np.float64) * np.asarray(coefficients, dtype=np.float64)
    return np.array([math.fsum(row) for row in prods.tolist()], dtype=np.float64)


def mean_abs_relative(estimates: npt.NDArray, measured: npt.NDArray) -> float:
    """Mean of |(estimate - measured) / measured|, summed with fsum.

    :param estimates: Estimated energies
    :param measured: Measured energies (all > 0)

    :returns: Mean absolute relative error as a fraction
    """

    rel = np.abs((np.asarray(estimates) - measured) / measured)
    return math.fsum(rel.tolist()) / rel.size


def zeta_grid(start: float = ZETA_GRID_DEFAULT[0],
              stop: float = ZETA_GRID_DEFAULT[1],
              step: float = ZETA_GRID_DEFAULT[2]) -> npt.NDArray[np.float64]:
    """Return an inclusive, evenly spaced grid of zeta values.

    Grid points are rounded to 12 decimals so that e.g. 0.66 is exactly the float 0.66.

    :param start: First grid value (>= 0)
    :param stop: Last grid value (>= start)
    :param step: Grid step (> 0)

    :returns: Array of grid values
    """

    if step <= 0:
        raise ValueError(f'Grid step must be positive; got {step}')
    if start < 0:
        raise ValueError(f'Grid start must be nonnegative; got {start}')
    if stop < start:
        raise ValueError(f'Grid stop ({stop}) is less than start ({start})')

    npts = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(npts), 12)


def parse_zeta_grid(grid: Union[str, Sequence[float], None]) -> npt.NDArray[np.float64]:
    """Parse a grid given as 'start:stop:step', a single value, or a sequence of values.

    :param grid: Grid specification; None gives the default grid

    :returns: Array of grid values
    """

    if grid is None:
        return zeta_grid()

    if isinstance(grid, str):
        flds = grid.split(':')
        if len(flds) == 3:
            return zeta_grid(*[float(xx) for xx in flds])
        if len(flds) == 1:
            values = [float(flds[0])]
        else:
            raise ValueError(f'Grid must be start:stop:step; got {grid}')
    else:
        values = [float(xx) for xx in grid]

    if len(values) == 0:
        raise ValueError('Grid is empty')
    if min(values) < 0:
        raise ValueError('Grid values must be nonnegative')
    return np.array(values, dtype=np.float64)


def bits_to_str(bits: npt.ArrayLike) -> str:
    """Convert a binary vector to a string of 0/1 characters"""
    return ''.join('1' if xx else '0' for xx in np.asarray(bits).tolist())


def str_to_bits(bitstr: str) -> npt.NDArray[np.int8]:
    """Convert a string of 0/1 characters to a binary vector"""

    bitstr = bitstr.strip()
    if any(cc not in '01' for cc in bitstr):
        raise ValueError(f'Bit string may only contain 0 and 1; got {bitstr}')
    return np.array([int(cc) for cc in bitstr], dtype=np.int8)


def comment_lines(lines: List[str]) -> str:
    """Format provenance lines as comment lines"""
    return ''.join(f'{COMMENT_CHAR} {ll}\n' for ll in lines)
