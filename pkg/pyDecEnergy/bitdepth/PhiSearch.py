import dask
import itertools
import math
import numpy as np
import numpy.typing as npt

from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from rich.console import Console
from rich import pretty

from .FeatureGroup import FeatureGroup, group_matrix, phi_from_groups, validate_groups
from .ZetaSweep import ZetaSweepResult, sweep_zeta
from ..catalog.FeatureCatalog import FeatureCatalog
from ..constants import PHI_SEARCH_WARN_GROUPS
from ..dataset.EnergyDataset import EnergyDataset
from ..energy_helpers import fsum_rows, get_file_iter, parse_zeta_grid, str_to_bits
from ..Exceptions_custom import AlignmentError, CatalogError, EmptyDatasetError
from ..model.EnergyModel import EnergyModel
from ..model.metrics import mean_estimation_error
from ..trainer.Trainer import check_disjoint

pretty.install()
con = Console()

# Upper bound on subsets x grid values x records evaluated in one task
CHUNK_ELEMENTS = 4_000_000

# Tasks submitted to the scheduler at once
TASKS_PER_WAVE = 64

# Subsets whose fast error is within this relative margin of the best are re-scored exactly
TIE_RTOL = 1e-9
TIE_ATOL = 1e-15

# Near-tied subsets kept for exact re-scoring
MAX_CANDIDATES = 64


class PhiSearchResult(NamedTuple):
    phi: npt.NDArray[np.int8]
    selected_groups: Tuple[str, ...]
    zeta: float
    mean_error: float
    train_error: float
    sweep: ZetaSweepResult
    evaluated: int


def table1_phi(catalog: FeatureCatalog) -> npt.NDArray[np.int8]:
    """The reference bit-depth flags of the FU leaves.

    :param catalog: FU catalog

    :returns: Binary vector aligned to the catalog

    :raises CatalogError: if the catalog is not the FU catalog
    """

    if catalog.variant != 'FU':
        raise CatalogError(f'The reference flags are defined for FU leaves; got the {catalog.variant} catalog')
    return catalog.phi_vector()


def enumerate_subsets(num_groups: int) -> Iterator[Tuple[int, ...]]:
    """All subsets of range(num_groups) ordered by size, then lexicographically"""

    for size in range(num_groups + 1):
        yield from itertools.combinations(range(num_groups), size)


def check_search_size(num_groups: int) -> int:
    """Number of subsets to evaluate; warns at PHI_SEARCH_WARN_GROUPS groups or more"""

    num_subsets = 2 ** num_groups
    if num_groups >= PHI_SEARCH_WARN_GROUPS:
        con.print(f'[gold3]WARNING[/]: {num_groups} groups give {num_subsets} subsets to evaluate')
    return num_subsets


def _tie_cutoff(err: float) -> float:
    return err * (1.0 + TIE_RTOL) + TIE_ATOL


def _candidates_in_chunk(subsets: List[Tuple[int, ...]],
                         base: npt.NDArray[np.float64],
                         per_group: npt.NDArray[np.float64],
                         zetas: npt.NDArray[np.float64],
                         measured: npt.NDArray[np.float64]) -> List[Tuple[float, int]]:
    """(fast error, position in chunk) of the subsets within the tie margin of the chunk's best"""

    sel = np.zeros((len(subsets), per_group.shape[0]), dtype=np.float64)
    for ss, subset in enumerate(subsets):
        sel[ss, list(subset)] = 1.0

    scaled = sel @ per_group
    est = base[np.newaxis, np.newaxis, :] + zetas[np.newaxis, :, np.newaxis] * scaled[:, np.newaxis, :]
    errors = np.mean(np.abs(est - measured) / measured, axis=2)

    best_err = errors.min(axis=1)
    near = np.flatnonzero(best_err <= _tie_cutoff(float(best_err.min())))[:MAX_CANDIDATES]
    return [(float(best_err[pp]), int(pp)) for pp in near]


def search_phi(model8: EnergyModel,
               groups: Sequence[FeatureGroup],
               train8: EnergyDataset,
               validation10: EnergyDataset,
               zeta_grid: Union[str, Sequence[float], None] = None,
               verbose: Optional[bool] = False) -> PhiSearchResult:
    """Brute-force search of the bit-depth flags over feature groups.

    Every subset of groups is flagged in turn (phi is constant within a group) and
    swept over the zeta grid; the (phi, zeta) with the lowest validation error wins.
    Ties go to the subset with fewer groups, then to the lexicographically first
    subset in group order. Subsets are scored in parallel with a vectorized error;
    the subsets that come within a relative 1e-9 of the best are then re-scored
    with the exact compensated sweep, which decides the winner.

    :param model8: Model trained on train8
    :param groups: Groups partitioning the model's catalog
    :param train8: 8-bit training dataset (reported error and disjointness check)
    :param validation10: 10-bit validation dataset
    :param zeta_grid: Zeta grid (None for 0:1.5:0.01)
    :param verbose: Output additional information

    :returns: PhiSearchResult

    :raises GroupPartitionError: if the groups do not partition the catalog
    :raises OverlapError: if train8 and validation10 share bit streams
    """

    catalog = model8.catalog
    validate_groups(groups, catalog)

    if validation10.size == 0:
        raise EmptyDatasetError(f'{validation10.name}: no records')
    if validation10.catalog != catalog:
        raise AlignmentError(f'{validation10.name} is aligned to the {validation10.variant} catalog; '
                             f'the model uses {catalog.variant}')
    check_disjoint(train8, validation10)

    zetas = parse_zeta_grid(zeta_grid)
    num_groups = len(groups)
    num_subsets = check_search_size(num_groups)

    # Estimate = base + zeta * (sum of the selected groups' scaled parts)
    coef = model8.coefficients
    gmat = group_matrix(groups, catalog)
    counts = validation10.counts
    base = fsum_rows(counts, coef)
    per_group = np.vstack([fsum_rows(counts, coef * gmat[gg, :]) for gg in range(num_groups)])
    measured = validation10.energies

    chunk_size = max(1, CHUNK_ELEMENTS // (zetas.size * validation10.size))

    if verbose:
        con.print(f'Searching {num_subsets} subsets of {num_groups} groups, {zetas.size} zeta values, '
                  f'{math.ceil(num_subsets / chunk_size)} chunks')

    # Near-best subsets in enumeration order
    candidates: List[Tuple[float, Tuple[int, ...]]] = []
    subsets = enumerate_subsets(num_groups)

    while True:
        chunks = []
        for _ in range(TASKS_PER_WAVE):
            chunk = list(itertools.islice(subsets, chunk_size))
            if len(chunk) == 0:
                break
            chunks.append(chunk)
        if len(chunks) == 0:
            break

        tasks = [dask.delayed(_candidates_in_chunk)(chunk, base, per_group, zetas, measured) for chunk in chunks]
        results = dask.compute(*tasks, scheduler='threads')

        for chunk, near in zip(chunks, results):
            candidates.extend((err, chunk[pos]) for err, pos in near)
        cutoff = _tie_cutoff(min(err for err, _ in candidates))
        candidates = [cc for cc in candidates if cc[0] <= cutoff][:MAX_CANDIDATES]

    best: Optional[Tuple[Tuple[str, ...], npt.NDArray[np.int8], ZetaSweepResult]] = None
    for _, subset in candidates:
        names = tuple(groups[gg].name for gg in subset)
        cand_phi = phi_from_groups(groups, names, catalog)
        cand_sweep = sweep_zeta(model8, cand_phi, validation10, grid=zetas)
        if best is None or cand_sweep.argmin[1] < best[2].argmin[1]:
            best = (names, cand_phi, cand_sweep)

    assert best is not None
    selected, phi, sweep = best
    zeta_star, err_star = sweep.argmin
    train_error = mean_estimation_error(model8, train8.project(catalog)).mean_error

    if verbose:
        con.print(f'{len(candidates)} near-tied subsets re-scored exactly')
        con.print(f'Best subset: {list(selected)}; zeta={zeta_star:g}, validation error {100.0 * err_star:.2f}%, '
                  f'training error {100.0 * train_error:.2f}%')

    return PhiSearchResult(phi=phi, selected_groups=selected, zeta=zeta_star, mean_error=err_star,
                           train_error=train_error, sweep=sweep, evaluated=num_subsets)


def read_phi(filename: Union[str, Path], catalog: FeatureCatalog) -> npt.NDArray[np.int8]:
    """Read bit-depth flags from a file.

    The first non-comment line holds the bit string, optionally as `phi=<bits>`;
    a model file carrying phi is accepted as well.

    :raises AlignmentError: if the number of flags does not match the catalog
    """

    for line in get_file_iter(filename):
        line = line.strip()
        if line == '':
            continue
        if '=' in line:
            key, val = line.split('=', 1)
            if key.strip() != 'phi':
                continue
            line = val.strip()

        phi = str_to_bits(line)
        if phi.size != len(catalog):
            raise AlignmentError(f'{filename}: {phi.size} flags for the {len(catalog)} leaves of the '
                                 f'{catalog.variant} catalog')
        return phi

    raise ValueError(f'{filename}: no phi found')


def resolve_phi(source: Union[str, Path], catalog: FeatureCatalog) -> npt.NDArray[np.int8]:
    """Bit-depth flags from 'table1', 'ones', 'zeros' or a file"""

    if str(source) == 'table1':
        return table1_phi(catalog)
    if str(source) == 'ones':
        return np.ones(len(catalog), dtype=np.int8)
    if str(source) == 'zeros':
        return np.zeros(len(catalog), dtype=np.int8)
    return read_phi(source, catalog)
