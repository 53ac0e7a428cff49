import numpy as np
import numpy.typing as npt
import pandas as pd   # type: ignore

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Iterator, List, Literal, NamedTuple, Optional, Sequence, Set, Tuple, TYPE_CHECKING

from .BitstreamMeta import BitstreamMeta
from .FeatureVector import FeatureVector
from .SetupManifest import SetupManifest
from ..catalog.FeatureCatalog import FeatureCatalog, build_catalog, projection_matrix
from ..constants import ID_COLUMN, INIT_FEATURE, META_COLUMNS
from ..Exceptions_custom import (AlignmentError, CatalogError, DuplicateIdError, EmptyDatasetError,
                                 InvalidValueError, NegativeCountError, SplitError)

if TYPE_CHECKING:
    from pathlib import Path


class EnergyRecord(NamedTuple):
    meta: BitstreamMeta
    counts: FeatureVector
    energy: float


class EnergyDataset(object):
    """Immutable collection of measured bit streams of one catalog variant.

    Records are kept sorted by id.
    """

    def __init__(self, name: str,
                 catalog: FeatureCatalog,
                 meta: pd.DataFrame,
                 counts: npt.ArrayLike,
                 energies: npt.ArrayLike,
                 manifest: Optional[SetupManifest] = None,
                 record_count_matches: Optional[bool] = None):
        """Create a dataset.

        :param name: Name of the dataset (usually the setup name)
        :param catalog: Catalog the counts are aligned to
        :param meta: Table with the id column and one column per metadata field
        :param counts: (records, leaves) integer count matrix
        :param energies: Measured decoding energies in joules
        :param manifest: Manifest the dataset was loaded with
        :param record_count_matches: Result of the declared-vs-actual record count check

        :raises AlignmentError: if the count matrix does not match the catalog
        :raises DuplicateIdError: if an id occurs more than once
        :raises NegativeCountError: if a count is negative
        :raises InvalidValueError: if an energy is not positive or the initialization count is not 1
        """

        cmat = np.asarray(counts)
        if cmat.ndim != 2:
            cmat = cmat.reshape((0, len(catalog)))
        evec = np.asarray(energies, dtype=np.float64)

        if cmat.shape[1] != len(catalog):
            raise AlignmentError(f'{name}: count matrix has {cmat.shape[1]} columns; the {catalog.variant} '
                                 f'catalog has {len(catalog)} leaves')
        if not (cmat.shape[0] == evec.size == meta.shape[0]):
            raise AlignmentError(f'{name}: {meta.shape[0]} metadata rows, {cmat.shape[0]} count rows '
                                 f'and {evec.size} energies')

        meta = meta.reindex(columns=[ID_COLUMN] + META_COLUMNS).reset_index(drop=True)

        dups = meta[ID_COLUMN][meta[ID_COLUMN].duplicated()].tolist()
        if len(dups) > 0:
            raise DuplicateIdError(f'{name}: duplicate id {dups[0]}')

        order = np.argsort(meta[ID_COLUMN].to_numpy(dtype=str), kind='stable')

        self.__name = name
        self.__catalog = catalog
        self.__meta = meta.iloc[order].reset_index(drop=True)
        self.__counts = cmat[order, :].astype(np.int64)
        self.__energies = evec[order]
        self.__manifest = manifest
        self.__record_count_matches = record_count_matches

        self.__counts.flags.writeable = False
        self.__energies.flags.writeable = False

        self._validate()

    def _validate(self):
        ids = self.ids

        if np.any(self.__counts < 0):
            rr, cc = np.argwhere(self.__counts < 0)[0]
            raise NegativeCountError(f'{self.__name}: negative count in row {ids[rr]}, '
                                     f'column {self.__catalog.names[cc]}')

        bad = ~(self.__energies > 0)
        if np.any(bad):
            raise InvalidValueError(f'{self.__name}: measured energy must be positive; '
                                    f'row {ids[int(np.argmax(bad))]}')

        if INIT_FEATURE in self.__catalog and self.size > 0:
            init = self.__counts[:, self.__catalog.position(INIT_FEATURE)]
            if np.any(init != 1):
                raise InvalidValueError(f'{self.__name}: {INIT_FEATURE} must be 1; '
                                        f'row {ids[int(np.argmax(init != 1))]}')

    def __len__(self) -> int:
        return self.__energies.size

    def __iter__(self) -> Iterator[EnergyRecord]:
        return self.records

    def __str__(self) -> str:
        return f'EnergyDataset({self.__name}, {self.__catalog.variant}, {self.size} records)'

    @property
    def name(self) -> str:
        return self.__name

    @property
    def catalog(self) -> FeatureCatalog:
        return self.__catalog

    @property
    def variant(self) -> str:
        return self.__catalog.variant

    @property
    def size(self) -> int:
        """Number of records"""
        return self.__energies.size

    @property
    def ids(self) -> List[str]:
        return self.__meta[ID_COLUMN].tolist()

    @property
    def meta(self) -> pd.DataFrame:
        """Copy of the metadata table"""
        return self.__meta.copy()

    @property
    def counts(self) -> npt.NDArray[np.int64]:
        """Read-only (records, leaves) count matrix"""
        return self.__counts

    @property
    def energies(self) -> npt.NDArray[np.float64]:
        """Read-only measured energies in joules"""
        return self.__energies

    @property
    def manifest(self) -> Optional[SetupManifest]:
        return self.__manifest

    @property
    def record_count_matches(self) -> Optional[bool]:
        """Declared-vs-actual record count check (None if no manifest was used)"""
        return self.__record_count_matches

    @property
    def setups(self) -> List[str]:
        """Setup names in order of first appearance"""
        return list(dict.fromkeys(self.__meta['setup'].tolist()))

    @property
    def sequences(self) -> Set[str]:
        return set(self.__meta['sequence'].tolist())

    @property
    def bit_depth(self) -> Optional[int]:
        """Bit depth shared by all records, None if mixed or empty"""
        depths = set(self.__meta['bit_depth'].tolist())
        if len(depths) == 1:
            return int(depths.pop())
        return None

    @property
    def records(self) -> Iterator[EnergyRecord]:
        """Iterator of (BitstreamMeta, FeatureVector, energy) records"""
        for idx in range(self.size):
            yield EnergyRecord(meta=self.record_meta(idx),
                               counts=FeatureVector(self.__catalog, self.__counts[idx, :]),
                               energy=float(self.__energies[idx]))

    def record_meta(self, idx: int) -> BitstreamMeta:
        """Metadata of the record at a position"""
        row = self.__meta.iloc[idx]
        return BitstreamMeta(id=row[ID_COLUMN], setup=row['setup'], sequence=row['sequence'],
                             qp=_opt_int(row['qp']), config=_opt_str(row['config']),
                             bit_depth=int(row['bit_depth']), format=row['format'],
                             frames=_opt_int(row['frames']))

    def get(self, id: str) -> EnergyRecord:
        """Record with the given id.

        :raises KeyError: if the id does not exist
        """

        pos = np.flatnonzero(self.__meta[ID_COLUMN].to_numpy() == id)
        if pos.size == 0:
            raise KeyError(f'{self.__name}: no record with id {id}')
        idx = int(pos[0])
        return EnergyRecord(meta=self.record_meta(idx),
                            counts=FeatureVector(self.__catalog, self.__counts[idx, :]),
                            energy=float(self.__energies[idx]))

    def count_matrix(self) -> npt.NDArray[np.float64]:
        """Count matrix as floating point"""
        return self.__counts.astype(np.float64)

    def _select(self, mask: npt.NDArray[np.bool_], name: Optional[str] = None) -> 'EnergyDataset':
        return EnergyDataset(name=self.__name if name is None else name,
                             catalog=self.__catalog,
                             meta=self.__meta[mask],
                             counts=self.__counts[mask, :],
                             energies=self.__energies[mask],
                             manifest=self.__manifest if name is None else None)

    def subset(self, ids: Sequence[str], name: Optional[str] = None) -> 'EnergyDataset':
        """Dataset restricted to the given ids.

        :raises KeyError: if an id does not exist
        """

        wanted = set(ids)
        unknown = wanted - set(self.ids)
        if len(unknown) > 0:
            raise KeyError(f'{self.__name}: unknown ids {sorted(unknown)[:5]}')
        return self._select(self.__meta[ID_COLUMN].isin(wanted).to_numpy(), name=name)

    def filter(self, config: Optional[str] = None,
               qp: Optional[int] = None,
               setup: Optional[str] = None,
               format: Optional[str] = None,
               name: Optional[str] = None) -> 'EnergyDataset':
        """Dataset restricted by metadata; None matches everything.

        :param config: Coding configuration
        :param qp: Quantization parameter
        :param setup: Setup name
        :param format: Video format
        :param name: Name of the new dataset
        """

        mask = np.ones(self.size, dtype=bool)
        for col, val in (('config', config), ('qp', qp), ('setup', setup), ('format', format)):
            if val is not None:
                mask &= (self.__meta[col] == val).to_numpy()
        return self._select(mask, name=name)

    def project(self, target: FeatureCatalog) -> 'EnergyDataset':
        """Project an FU dataset onto another catalog (FA).

        :raises CatalogError: if the dataset is not FU or target is not FA
        """

        if target == self.__catalog:
            return self
        if self.__catalog != build_catalog('FU'):
            raise CatalogError(f'{self.__name}: only FU datasets can be projected; got {self.variant}')

        pmat = projection_matrix(self.__catalog, target)
        return EnergyDataset(name=self.__name, catalog=target, meta=self.__meta,
                             counts=self.__counts @ pmat.T, energies=self.__energies)

    @classmethod
    def concat(cls, datasets: Sequence['EnergyDataset'], name: Optional[str] = None) -> 'EnergyDataset':
        """Union of datasets of the same catalog.

        :param datasets: Datasets to combine
        :param name: Name of the union (defaults to the names joined by '+')

        :raises AlignmentError: if the catalogs differ
        :raises DuplicateIdError: if an id occurs in more than one dataset
        """

        if len(datasets) == 0:
            raise EmptyDatasetError('no records: nothing to concatenate')

        catalog = datasets[0].catalog
        for ds in datasets[1:]:
            if ds.catalog != catalog:
                raise AlignmentError(f'Cannot combine {datasets[0].name} ({catalog.variant}) '
                                     f'with {ds.name} ({ds.variant})')

        if name is None:
            name = '+'.join(ds.name for ds in datasets)

        return cls(name=name, catalog=catalog,
                   meta=pd.concat([ds.meta for ds in datasets], ignore_index=True),
                   counts=np.vstack([ds.counts for ds in datasets]),
                   energies=np.concatenate([ds.energies for ds in datasets]))

    def split(self, rule: 'SplitRule') -> Tuple['EnergyDataset', 'EnergyDataset']:
        """Split into training and validation datasets; see split()"""
        return split(self, rule)

    def write(self, out: 'Path | str'):
        """Write the dataset to a directory or a netCDF file; see write_dataset()"""
        from .DatasetFile import write_dataset
        write_dataset(self, out)


class SplitRule(BaseModel):
    """How to split a dataset into training and validation halves.

    by='setup' trains on train_setup and validates on every other setup;
    by='sequence' assigns whole source sequences to one half.
    """

    model_config = ConfigDict(frozen=True)

    by: Literal['setup', 'sequence']
    train_setup: Optional[str] = None
    validation_fraction: float = Field(default=0.25, gt=0.0, lt=1.0)
    seed: int = 0

    @model_validator(mode='after')
    def _check_setup(self) -> 'SplitRule':
        if self.by == 'setup' and not self.train_setup:
            raise ValueError('A by-setup split needs train_setup')
        return self

    @classmethod
    def by_setup(cls, train_setup: str) -> 'SplitRule':
        return cls(by='setup', train_setup=train_setup)

    @classmethod
    def by_sequence(cls, validation_fraction: float = 0.25, seed: int = 0) -> 'SplitRule':
        return cls(by='sequence', validation_fraction=validation_fraction, seed=seed)


def split(dataset: EnergyDataset, rule: SplitRule) -> Tuple[EnergyDataset, EnergyDataset]:
    """Split a dataset into disjoint training and validation halves.

    :param dataset: Dataset to split
    :param rule: Split rule

    :returns: (train, validation)

    :raises SplitError: if the rule leaves a half empty
    """

    meta = dataset.meta

    if rule.by == 'setup':
        if rule.train_setup not in dataset.setups:
            raise SplitError(f'{dataset.name}: setup {rule.train_setup} not in dataset (setups: {dataset.setups})')
        train_mask = (meta['setup'] == rule.train_setup).to_numpy()
        train_name = rule.train_setup
        val_name = '+'.join(ss for ss in dataset.setups if ss != rule.train_setup)
    else:
        sequences = sorted(dataset.sequences)
        if len(sequences) < 2:
            raise SplitError(f'{dataset.name}: a by-sequence split needs at least 2 sequences; '
                             f'got {len(sequences)}')

        num_val = min(max(1, int(round(rule.validation_fraction * len(sequences)))), len(sequences) - 1)
        perm = np.random.default_rng(rule.seed).permutation(len(sequences))
        val_seqs = {sequences[ii] for ii in perm[:num_val]}

        train_mask = ~meta['sequence'].isin(val_seqs).to_numpy()
        train_name = f'{dataset.name}-train'
        val_name = f'{dataset.name}-validation'

    if train_mask.all() or not train_mask.any():
        raise SplitError(f'{dataset.name}: split rule leaves the '
                         f'{"validation" if train_mask.all() else "training"} half empty')

    return dataset._select(train_mask, name=train_name), dataset._select(~train_mask, name=val_name)


def _opt_int(value) -> Optional[int]:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    return int(value)


def _opt_str(value) -> Optional[str]:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    return str(value)
