import math
import numpy as np
import pandas as pd   # type: ignore
import xarray as xr

from pathlib import Path
from typing import Dict, List, Optional, Union

from rich.console import Console
from rich import pretty

from .EnergyDataset import EnergyDataset
from .SetupManifest import SetupManifest
from ..catalog.FeatureCatalog import FeatureCatalog, build_catalog
from ..constants import (BIT_DEPTHS, CODING_CONFIGS, ENERGY_COLUMN, ID_COLUMN, META_COLUMNS,
                         QP_VALUES, VIDEO_FORMATS)
from ..energy_helpers import float_to_str
from ..Exceptions_custom import (DatasetError, DuplicateIdError, EmptyDatasetError, InvalidValueError,
                                 MissingEnergyError, MissingFeatureError, NegativeCountError,
                                 OrphanEnergyError, UnknownFeatureError)

pretty.install()
con = Console()

FEATURES_FILE = 'features.csv'
ENERGIES_FILE = 'energies.csv'
MANIFEST_FILE = 'manifest.toml'

INT64_MIN = int(np.iinfo(np.int64).min)
INT64_MAX = int(np.iinfo(np.int64).max)

# Largest float below which every integer is exact
MAX_EXACT_FLOAT = 2.0 ** 53


def load_dataset(features_path: Union[str, Path],
                 energies_path: Union[str, Path],
                 manifest_path: Union[str, Path],
                 verbose: Optional[bool] = False) -> EnergyDataset:
    """Ingest feature counts, measured energies and a setup manifest.

    The feature CSV has an id column followed by one column per catalog leaf in
    canonical order. The energy CSV has id and energy_joules columns followed by
    optional metadata columns.

    :param features_path: Feature count CSV file
    :param energies_path: Energy CSV file
    :param manifest_path: Setup manifest (TOML)
    :param verbose: Output additional information

    :returns: EnergyDataset; its record_count_matches property holds the manifest check

    :raises DatasetError: (or one of its subclasses) naming the offending row or column
    """

    manifest = SetupManifest.read(manifest_path)
    catalog = build_catalog(manifest.variant)

    if verbose:
        con.print(f'Reading [bold]{features_path}[/]')
    ids, counts = _read_features(features_path, catalog)

    if verbose:
        con.print(f'Reading [bold]{energies_path}[/]')
    edf = _read_energies(energies_path)

    # Join on id; both directions must be total
    eids = set(edf.index)
    for cid in ids:
        if cid not in eids:
            raise MissingEnergyError(f'{energies_path}: no energy for id {cid}')
    fids = set(ids)
    for cid in edf.index:
        if cid not in fids:
            raise OrphanEnergyError(f'{energies_path}: energy for id {cid} has no feature row')

    edf = edf.loc[ids]
    energies = _parse_energies(edf, energies_path)
    meta = _parse_meta(edf, manifest, energies_path)

    dataset = EnergyDataset(name=manifest.name, catalog=catalog, meta=meta, counts=counts,
                            energies=energies, manifest=manifest,
                            record_count_matches=manifest.records == len(ids))

    if not dataset.record_count_matches:
        con.print(f'[gold3]WARNING[/]: {manifest.name} declares {manifest.records} records; '
                  f'{len(ids)} were loaded')
    elif verbose:
        con.print(f'{manifest.name}: {len(ids)} records [green4]OK[/green4]')

    return dataset


def _read_csv(filename: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(filename, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f'{filename}: no records') from None


def _read_features(filename: Union[str, Path], catalog: FeatureCatalog):
    df = _read_csv(filename)

    if df.shape[0] == 0:
        raise EmptyDatasetError(f'{filename}: no records')

    columns = df.columns.tolist()
    if columns[0] != ID_COLUMN:
        raise MissingFeatureError(f'{filename}: first column must be {ID_COLUMN}; got {columns[0]}')

    fcols = columns[1:]
    for col in fcols:
        if col not in catalog:
            raise UnknownFeatureError(f'{filename}: unknown feature column {col}')
    for col in catalog.names:
        if col not in fcols:
            raise MissingFeatureError(f'{filename}: missing feature column {col}')
    if tuple(fcols) != catalog.names:
        pos = next(ii for ii, (aa, bb) in enumerate(zip(fcols, catalog.names)) if aa != bb)
        raise MissingFeatureError(f'{filename}: column {fcols[pos]} is out of canonical order '
                                  f'(expected {catalog.names[pos]})')

    ids = df[ID_COLUMN].tolist()
    _check_ids(ids, filename)

    counts = np.zeros((len(ids), len(catalog)), dtype=np.int64)
    for cc, col in enumerate(fcols):
        values = _parse_counts(df[col], ids, col, filename)
        if np.any(values < 0):
            rr = int(np.argmax(values < 0))
            raise NegativeCountError(f'{filename}: row {ids[rr]}, column {col}: negative count {int(values[rr])}')
        counts[:, cc] = values

    return ids, counts


def _parse_counts(column: pd.Series, ids: List[str], col: str, filename: Union[str, Path]) -> np.ndarray:
    """Count column as int64; every value must be an integer representable exactly"""

    try:
        return column.astype(np.int64).to_numpy()
    except (ValueError, OverflowError, TypeError):
        pass

    values = np.zeros(len(column), dtype=np.int64)
    for rr, sval in enumerate(column.tolist()):
        value = _to_count(sval)
        if value is None:
            raise InvalidValueError(f'{filename}: row {ids[rr]}, column {col}: '
                                    f'count must be an integer in the int64 range; got "{sval}"')
        values[rr] = value
    return values


def _to_count(sval: str) -> Optional[int]:
    try:
        value = int(sval)
    except ValueError:
        # Integral floats such as 12.0 are accepted while they are exact
        try:
            fval = float(sval)
        except ValueError:
            return None
        if not math.isfinite(fval) or not fval.is_integer() or abs(fval) > MAX_EXACT_FLOAT:
            return None
        value = int(fval)

    if not INT64_MIN <= value <= INT64_MAX:
        return None
    return value


def _read_energies(filename: Union[str, Path]) -> pd.DataFrame:
    df = _read_csv(filename)

    columns = df.columns.tolist()
    if columns[:2] != [ID_COLUMN, ENERGY_COLUMN]:
        raise DatasetError(f'{filename}: header must start with {ID_COLUMN},{ENERGY_COLUMN}; '
                           f'got {",".join(columns[:2])}')
    for col in columns[2:]:
        if col not in META_COLUMNS:
            raise DatasetError(f'{filename}: unknown metadata column {col}')

    _check_ids(df[ID_COLUMN].tolist(), filename)
    return df.set_index(ID_COLUMN, drop=False)


def _check_ids(ids: List[str], filename: Union[str, Path]):
    seen = set()
    for rr, cid in enumerate(ids):
        if cid == '':
            raise InvalidValueError(f'{filename}: empty id in data row {rr + 1}')
        if cid in seen:
            raise DuplicateIdError(f'{filename}: duplicate id {cid}')
        seen.add(cid)


def _parse_energies(edf: pd.DataFrame, filename: Union[str, Path]) -> np.ndarray:
    energies = np.zeros(edf.shape[0], dtype=np.float64)
    for rr, (cid, sval) in enumerate(zip(edf[ID_COLUMN], edf[ENERGY_COLUMN])):
        try:
            energies[rr] = float(sval)
        except ValueError:
            raise InvalidValueError(f'{filename}: row {cid}: energy is not a number ("{sval}")') from None
        if not energies[rr] > 0:
            raise InvalidValueError(f'{filename}: row {cid}: measured energy must be positive; got {sval}')
    return energies


def _parse_meta(edf: pd.DataFrame, manifest: SetupManifest, filename: Union[str, Path]) -> pd.DataFrame:
    records: List[Dict] = []

    for _, row in edf.iterrows():
        cid = row[ID_COLUMN]

        def field(name: str) -> str:
            return str(row[name]).strip() if name in row.index else ''

        try:
            qp = int(field('qp')) if field('qp') != '' else None
            bit_depth = int(field('bit_depth')) if field('bit_depth') != '' else manifest.bit_depth
            frames = int(field('frames')) if field('frames') != '' else None
        except ValueError:
            raise InvalidValueError(f'{filename}: row {cid}: qp, bit_depth and frames must be integers') from None

        config = field('config') or None
        fmt = field('format') or manifest.format

        if qp is not None and qp not in QP_VALUES:
            raise InvalidValueError(f'{filename}: row {cid}: qp must be one of {QP_VALUES}; got {qp}')
        if config is not None and config not in CODING_CONFIGS:
            raise InvalidValueError(f'{filename}: row {cid}: config must be one of {CODING_CONFIGS}; got {config}')
        if bit_depth not in BIT_DEPTHS:
            raise InvalidValueError(f'{filename}: row {cid}: bit_depth must be one of {BIT_DEPTHS}; got {bit_depth}')
        if fmt not in VIDEO_FORMATS:
            raise InvalidValueError(f'{filename}: row {cid}: format must be one of {VIDEO_FORMATS}; got {fmt}')
        if frames is not None and frames < 1:
            raise InvalidValueError(f'{filename}: row {cid}: frames must be positive; got {frames}')

        records.append({ID_COLUMN: cid,
                        'setup': field('setup') or manifest.name,
                        'sequence': field('sequence') or cid,
                        'qp': qp, 'config': config, 'bit_depth': bit_depth,
                        'format': fmt, 'frames': frames})

    return pd.DataFrame.from_records(records, columns=[ID_COLUMN] + META_COLUMNS).astype(object)


def write_dataset(dataset: EnergyDataset, out: Union[str, Path]):
    """Write a dataset so that read_dataset reproduces it bit-exactly.

    :param dataset: Dataset to write
    :param out: Directory (features.csv, energies.csv, manifest.toml) or a filename ending in .nc
    """

    out = Path(out)
    if out.suffix == '.nc':
        _write_netcdf(dataset, out)
        return

    out.mkdir(parents=True, exist_ok=True)

    fdf = pd.DataFrame(dataset.counts, columns=list(dataset.catalog.names))
    fdf.insert(0, ID_COLUMN, dataset.ids)
    fdf.to_csv(out / FEATURES_FILE, index=False)

    meta = dataset.meta
    edf = pd.DataFrame({ID_COLUMN: meta[ID_COLUMN].tolist(),
                        ENERGY_COLUMN: [float_to_str(ee) for ee in dataset.energies.tolist()]})
    for col in META_COLUMNS:
        edf[col] = ['' if _is_missing(vv) else str(vv) for vv in meta[col]]
    edf.to_csv(out / ENERGIES_FILE, index=False)

    _manifest_for(dataset).write(out / MANIFEST_FILE)


def read_dataset(path: Union[str, Path], verbose: Optional[bool] = False) -> EnergyDataset:
    """Read a dataset written by write_dataset.

    :param path: Dataset directory or netCDF file
    :param verbose: Output additional information
    """

    path = Path(path)
    if path.suffix == '.nc':
        return _read_netcdf(path)

    if not path.is_dir():
        raise FileNotFoundError(f'{path}: dataset directory does not exist')

    return load_dataset(path / FEATURES_FILE, path / ENERGIES_FILE, path / MANIFEST_FILE, verbose=verbose)


def _manifest_for(dataset: EnergyDataset) -> SetupManifest:
    if dataset.manifest is not None and dataset.manifest.records == dataset.size:
        return dataset.manifest

    fmts = set(dataset.meta['format'].tolist())
    return SetupManifest(name=dataset.name, records=dataset.size,
                         bit_depth=dataset.bit_depth or (dataset.manifest.bit_depth if dataset.manifest else 8),
                         source='' if dataset.manifest is None else dataset.manifest.source,
                         variant=dataset.variant,
                         format=fmts.pop() if len(fmts) == 1 else 'SDR')


def _is_missing(value) -> bool:
    return value is None or (isinstance(value, float) and np.isnan(value))


def _write_netcdf(dataset: EnergyDataset, filename: Path):
    meta = dataset.meta
    manifest = _manifest_for(dataset)

    def int_column(col: str) -> np.ndarray:
        return np.array([-1 if _is_missing(vv) else int(vv) for vv in meta[col]], dtype=np.int64)

    def str_column(col: str) -> np.ndarray:
        return np.array(['' if _is_missing(vv) else str(vv) for vv in meta[col]], dtype=object)

    xr_ds = xr.Dataset(data_vars={'counts': (('bitstream', 'leaf'), dataset.counts.copy()),
                                  ENERGY_COLUMN: (('bitstream', ), dataset.energies.copy()),
                                  'setup': (('bitstream', ), str_column('setup')),
                                  'sequence': (('bitstream', ), str_column('sequence')),
                                  'qp': (('bitstream', ), int_column('qp')),
                                  'config': (('bitstream', ), str_column('config')),
                                  'bit_depth': (('bitstream', ), int_column('bit_depth')),
                                  'format': (('bitstream', ), str_column('format')),
                                  'frames': (('bitstream', ), int_column('frames'))},
                       coords={'bitstream': np.array(dataset.ids, dtype=object),
                               'leaf': np.array(dataset.catalog.names, dtype=object)})

    xr_ds.attrs = {'name': dataset.name, 'variant': dataset.variant,
                   'records': manifest.records, 'bit_depth': manifest.bit_depth,
                   'source': manifest.source, 'format': manifest.format}

    xr_ds.to_netcdf(filename, format='NETCDF4', engine='netcdf4')


def _read_netcdf(filename: Path) -> EnergyDataset:
    with xr.open_dataset(filename, engine='netcdf4', mask_and_scale=False) as xr_ds:
        xr_ds.load()

        variant = str(xr_ds.attrs['variant'])
        catalog = build_catalog(variant)
        catalog.check_aligned([str(xx) for xx in xr_ds['leaf'].values], what=str(filename))

        manifest = SetupManifest(name=str(xr_ds.attrs['name']), records=int(xr_ds.attrs['records']),
                                 bit_depth=int(xr_ds.attrs['bit_depth']), source=str(xr_ds.attrs['source']),
                                 variant=variant, format=str(xr_ds.attrs['format']))

        meta = pd.DataFrame({ID_COLUMN: [str(xx) for xx in xr_ds['bitstream'].values]})
        for col in META_COLUMNS:
            values = xr_ds[col].values.tolist()
            if col in ('qp', 'bit_depth', 'frames'):
                meta[col] = pd.Series([None if vv == -1 else int(vv) for vv in values], dtype=object)
            else:
                meta[col] = pd.Series([None if vv == '' else str(vv) for vv in values], dtype=object)

        return EnergyDataset(name=manifest.name, catalog=catalog, meta=meta,
                             counts=xr_ds['counts'].values.astype(np.int64),
                             energies=xr_ds[ENERGY_COLUMN].values.astype(np.float64),
                             manifest=manifest,
                             record_count_matches=manifest.records == xr_ds.sizes['bitstream'])
