import functools
import numpy as np
import numpy.typing as npt
import pandas as pd   # type: ignore

from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .FeatureDefinition import FeatureDefinition, parse_leaf_name
from ..constants import CATEGORIES, DEPTH_DELIM, VARIANTS
from ..energy_helpers import comment_lines
from ..Exceptions_custom import AlignmentError, CatalogError
from ..metadata.metadata import package_metadata


class FeatureCatalog(object):
    """Ordered, immutable collection of leaf features for one model variant.
    """

    def __init__(self, variant: str, leaves: Sequence[FeatureDefinition]):
        """Create a catalog.

        :param variant: Model variant (FA, FU, or a custom name for ad hoc catalogs)
        :param leaves: Leaf definitions in canonical order

        :raises ValueError: if a leaf is invalid or a leaf name occurs twice
        """

        self.__variant = variant
        self.__leaves: Tuple[FeatureDefinition, ...] = tuple(leaves)

        index: Dict[str, int] = {}
        for pos, leaf in enumerate(self.__leaves):
            leaf.validate()
            if leaf.name in index:
                raise ValueError(f'Duplicate leaf {leaf.name} in catalog')
            index[leaf.name] = pos

        self.__index = MappingProxyType(index)
        self.__names = tuple(index.keys())

    def __len__(self) -> int:
        return len(self.__leaves)

    def __iter__(self) -> Iterator[FeatureDefinition]:
        return iter(self.__leaves)

    def __contains__(self, name: str) -> bool:
        return name in self.__index

    def __getitem__(self, item: Union[int, str]) -> FeatureDefinition:
        """Get a leaf by position or by leaf name.

        :param item: position or leaf name
        :returns: FeatureDefinition
        """
        if isinstance(item, str):
            return self.__leaves[self.position(item)]
        return self.__leaves[item]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureCatalog):
            return NotImplemented
        return self.__variant == other.variant and self.__names == other.names

    def __hash__(self) -> int:
        return hash((self.__variant, self.__names))

    def __str__(self) -> str:
        return f'FeatureCatalog({self.__variant}, {len(self)} leaves)'

    @property
    def variant(self) -> str:
        """Model variant of the catalog"""
        return self.__variant

    @property
    def leaves(self) -> Tuple[FeatureDefinition, ...]:
        return self.__leaves

    @property
    def index(self) -> Mapping[str, int]:
        """Read-only map of leaf name to position"""
        return self.__index

    @property
    def names(self) -> Tuple[str, ...]:
        """Leaf names in canonical order; this is the CSV header order"""
        return self.__names

    @property
    def rows(self) -> List[str]:
        """Table rows in order of first appearance"""
        return list(dict.fromkeys(leaf.row for leaf in self.__leaves))

    def position(self, label: str, depth: Optional[int] = None) -> int:
        """Position of a leaf.

        :param label: Feature label or full leaf name
        :param depth: Depth of the leaf (when label is given without depth)

        :returns: Position of the leaf in the catalog

        :raises KeyError: if the leaf does not exist
        """

        name = label if depth is None else f'{label}{DEPTH_DELIM}{depth}'
        try:
            return self.__index[name]
        except KeyError:
            raise KeyError(f'Leaf {name} does not exist in the {self.__variant} catalog') from None

    def positions_of_label(self, label: str) -> List[int]:
        """Positions of all leaves with the given label (all depths)"""
        return [pos for pos, leaf in enumerate(self.__leaves) if leaf.label == label]

    def category_counts(self) -> Dict[str, int]:
        """Number of leaves per category in canonical category order"""
        counts = {cc: 0 for cc in CATEGORIES}
        for leaf in self.__leaves:
            counts[leaf.category] += 1
        return counts

    def phi_vector(self) -> npt.NDArray[np.int8]:
        """Binary vector of the bit-depth flags, aligned to the leaves.

        :returns: Array with entry k equal to the phi flag of leaf k
        """
        return np.array([leaf.phi for leaf in self.__leaves], dtype=np.int8)

    def check_aligned(self, names: Sequence[str], what: str = 'vector'):
        """Raise AlignmentError unless names equals the canonical leaf order.

        :param names: Leaf names to check
        :param what: Description used in the error message
        """

        if tuple(names) != self.__names:
            missing = [nn for nn in self.__names if nn not in names]
            extra = [nn for nn in names if nn not in self.__index]
            raise AlignmentError(f'{what} is not aligned to the {self.__variant} catalog '
                                 f'(missing: {missing[:5]}, unknown: {extra[:5]})')

    def to_dataframe(self) -> pd.DataFrame:
        """Catalog as a table with one row per leaf"""

        records = [[leaf.name, leaf.label, leaf.category,
                    '' if leaf.depth is None else leaf.depth,
                    leaf.phi, int(leaf.in_fa), int(leaf.in_fu), leaf.row, leaf.counting_rule]
                   for leaf in self.__leaves]
        col_names = ['leaf', 'label', 'category', 'depth', 'phi', 'FA', 'FU', 'row', 'counting_rule']
        return pd.DataFrame.from_records(records, columns=col_names)

    def to_text(self) -> str:
        """Fixed-width text table (leaf, category, depth, phi, FA, FU)"""

        outstr = f'{"leaf":<16}{"category":<10}{"depth":>6}{"phi":>5}{"FA":>4}{"FU":>4}\n'
        for leaf in self.__leaves:
            depth = '-' if leaf.depth is None else str(leaf.depth)
            outstr += (f'{leaf.name:<16}{leaf.category:<10}{depth:>6}{leaf.phi:>5}'
                       f'{"x" if leaf.in_fa else "-":>4}{"x" if leaf.in_fu else "-":>4}\n')
        return outstr

    def write_csv(self, filename: str, provenance: Optional[List[str]] = None):
        """Write the catalog table to a CSV file, provenance lines first as comments"""

        with open(filename, 'w') as fh:
            fh.write(comment_lines(provenance or []))
            self.to_dataframe().to_csv(fh, index=False)

    @classmethod
    def from_names(cls, names: Sequence[str], variant: str = 'custom',
                   phi: Optional[Sequence[int]] = None,
                   category: str = 'General') -> 'FeatureCatalog':
        """Create an ad hoc catalog from leaf names.

        :param names: Leaf names in order
        :param variant: Name of the catalog
        :param phi: Optional phi flags (defaults to all ones)
        :param category: Category assigned to every leaf

        :returns: FeatureCatalog
        """

        if variant in VARIANTS:
            catalog = build_catalog(variant)
            catalog.check_aligned(names, what='leaf list')
            return catalog

        if phi is None:
            phi = [1] * len(names)

        leaves = []
        for cname, cphi in zip(names, phi):
            label, depth = parse_leaf_name(cname)
            leaves.append(FeatureDefinition(label=label, category=category, depth=depth, phi=int(cphi),
                                            in_fa=False, in_fu=False, counting_rule='', row=label))
        return cls(variant=variant, leaves=leaves)


@functools.cache
def build_catalog(variant: str) -> FeatureCatalog:
    """Expand the feature table into the leaf catalog of a model variant.

    Leaves follow table row order, then label order within the row, then ascending depth.

    :param variant: FA or FU

    :returns: FeatureCatalog

    :raises CatalogError: if the variant is unknown
    """

    if variant not in VARIANTS:
        raise CatalogError(f'Model variant must be one of {VARIANTS}; got {variant}')

    leaves: List[FeatureDefinition] = []

    for row, rmeta in package_metadata()['features'].items():
        if variant == 'FA':
            if not rmeta['in_fa']:
                continue
            if rmeta['fa_merged']:
                for label, rule in rmeta['merged'].items():
                    leaves.append(FeatureDefinition(label=label, category=rmeta['category'], depth=None,
                                                    phi=rmeta['phi'], in_fa=True, in_fu=False,
                                                    counting_rule=rule, row=row))
                continue
        elif not rmeta['in_fu']:
            continue

        if rmeta['depths'] is None:
            depths: List[Optional[int]] = [None]
        else:
            depths = list(range(rmeta['depths'][0], rmeta['depths'][1] + 1))

        for label, rule in rmeta['leaves'].items():
            for depth in depths:
                leaves.append(FeatureDefinition(label=label, category=rmeta['category'], depth=depth,
                                                phi=rmeta['phi'],
                                                in_fa=rmeta['in_fa'] and not rmeta['fa_merged'],
                                                in_fu=rmeta['in_fu'],
                                                counting_rule=rule, row=row))

    return FeatureCatalog(variant=variant, leaves=leaves)


def phi_vector(catalog: FeatureCatalog) -> npt.NDArray[np.int8]:
    """Binary vector of the bit-depth flags of a catalog"""
    return catalog.phi_vector()


def projection_matrix(source: FeatureCatalog, target: FeatureCatalog) -> npt.NDArray[np.int64]:
    """Matrix P such that target_counts = P @ source_counts.

    Shared leaves are copied, merged leaves sum the leaves of their table row that the
    target does not carry, and source-only leaves are dropped.

    :param source: FU catalog
    :param target: FA catalog

    :returns: (len(target), len(source)) integer matrix
    """

    if source.variant != 'FU':
        raise CatalogError(f'Projection source must be the FU catalog; got {source.variant}')
    if target.variant != 'FA':
        raise CatalogError(f'Projection target must be the FA catalog; got {target.variant}')

    pmat = np.zeros((len(target), len(source)), dtype=np.int64)

    for tpos, tleaf in enumerate(target):
        if tleaf.name in source:
            pmat[tpos, source.position(tleaf.name)] = 1
        else:
            # Merged leaf: sum of the source leaves of the same row
            for spos, sleaf in enumerate(source):
                if sleaf.row == tleaf.row:
                    pmat[tpos, spos] = 1

    return pmat


def project_counts(fu_counts, target: FeatureCatalog):
    """Project FU-aligned counts onto the FA catalog.

    n_PBslice = n_Bslice + n_Pslice, FU-only leaves are dropped and shared leaves
    are copied. This is a count pass-through: FA fracpelHor additionally includes the
    6*w border rows that FU assigns to fracpelBoth, which cannot be recovered from FU
    counts, so the projection is approximate for fracpel leaves.

    :param fu_counts: FeatureVector aligned to the FU catalog
    :param target: FA catalog

    :returns: FeatureVector aligned to target
    """

    from ..dataset.FeatureVector import FeatureVector

    fu_catalog = build_catalog('FU')
    if fu_counts.catalog != fu_catalog:
        raise AlignmentError(f'Counts must be aligned to the FU catalog; got {fu_counts.catalog.variant}')

    pmat = projection_matrix(fu_catalog, target)
    return FeatureVector(target, pmat @ fu_counts.counts, strict=False)
