import numpy as np
import numpy.typing as npt

from typing import Dict, Mapping, Optional, TYPE_CHECKING

from ..constants import INIT_FEATURE
from ..Exceptions_custom import AlignmentError, InvalidValueError, NegativeCountError

if TYPE_CHECKING:
    from ..catalog.FeatureCatalog import FeatureCatalog


class FeatureVector(object):
    """Per-bit-stream feature counts aligned to a catalog.
    """

    def __init__(self, catalog: 'FeatureCatalog',
                 counts: npt.ArrayLike,
                 strict: Optional[bool] = True):
        """Create a feature vector.

        :param catalog: Catalog the counts are aligned to
        :param counts: One nonnegative integer count per catalog leaf
        :param strict: Also require the initialization feature to be counted exactly once

        :raises AlignmentError: if the length does not match the catalog
        :raises NegativeCountError: if a count is negative
        :raises InvalidValueError: if strict and the initialization count is not 1
        """

        values = np.asarray(counts)
        if values.ndim != 1 or values.size != len(catalog):
            raise AlignmentError(f'Expected {len(catalog)} counts for the {catalog.variant} catalog; '
                                 f'got shape {values.shape}')
        if values.size > 0 and not np.all(np.equal(np.mod(values, 1), 0)):
            raise InvalidValueError('Feature counts must be integers')

        self.__catalog = catalog
        self.__counts = values.astype(np.int64)
        self.__counts.flags.writeable = False

        if np.any(self.__counts < 0):
            bad = catalog.names[int(np.argmax(self.__counts < 0))]
            raise NegativeCountError(f'Negative count for feature {bad}')

        if strict and INIT_FEATURE in catalog and self[INIT_FEATURE] != 1:
            raise InvalidValueError(f'{INIT_FEATURE} must be counted once per bit stream; '
                                    f'got {self[INIT_FEATURE]}')

    def __len__(self) -> int:
        return self.__counts.size

    def __getitem__(self, name: str) -> int:
        """Count of a leaf by name"""
        return int(self.__counts[self.__catalog.position(name)])

    def __add__(self, other: 'FeatureVector') -> 'FeatureVector':
        if not isinstance(other, FeatureVector):
            return NotImplemented
        if other.catalog != self.__catalog:
            raise AlignmentError('Cannot add feature vectors of different catalogs')
        return FeatureVector(self.__catalog, self.__counts + other.counts, strict=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return other.catalog == self.__catalog and np.array_equal(other.counts, self.__counts)

    def __str__(self) -> str:
        nonzero = {kk: vv for kk, vv in self.to_dict().items() if vv != 0}
        return f'FeatureVector({self.__catalog.variant}, nonzero={nonzero})'

    @property
    def catalog(self) -> 'FeatureCatalog':
        return self.__catalog

    @property
    def catalog_variant(self) -> str:
        return self.__catalog.variant

    @property
    def counts(self) -> npt.NDArray[np.int64]:
        """Read-only array of the counts"""
        return self.__counts

    def to_dict(self) -> Dict[str, int]:
        """Dictionary of leaf name to count"""
        return dict(zip(self.__catalog.names, self.__counts.tolist()))

    @classmethod
    def from_dict(cls, catalog: 'FeatureCatalog',
                  counts: Mapping[str, int],
                  strict: Optional[bool] = True) -> 'FeatureVector':
        """Create a feature vector from a sparse mapping; missing leaves count zero.

        :param catalog: Catalog to align to
        :param counts: Mapping of leaf name to count
        :param strict: Passed to the constructor

        :raises AlignmentError: if a key is not a leaf of the catalog
        """

        values = np.zeros(len(catalog), dtype=np.int64)
        for name, cnt in counts.items():
            if name not in catalog:
                raise AlignmentError(f'{name} is not a leaf of the {catalog.variant} catalog')
            values[catalog.position(name)] = cnt
        return cls(catalog, values, strict=strict)
