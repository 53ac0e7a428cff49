import numpy as np
import numpy.typing as npt

from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

from ..catalog.FeatureCatalog import FeatureCatalog
from ..energy_helpers import comment_lines, get_file_iter
from ..Exceptions_custom import GroupPartitionError


class FeatureGroup(NamedTuple):
    """Named set of catalog leaves sharing one bit-depth flag"""

    name: str
    members: Tuple[str, ...]


def default_groups(catalog: FeatureCatalog) -> List[FeatureGroup]:
    """One group per feature table row; a row covers all depths of its labels.

    :param catalog: Catalog to group

    :returns: Groups in catalog row order
    """

    groups: Dict[str, List[str]] = {}
    for leaf in catalog:
        groups.setdefault(leaf.row, []).append(leaf.name)
    return [FeatureGroup(name=row, members=tuple(members)) for row, members in groups.items()]


def singleton_groups(catalog: FeatureCatalog) -> List[FeatureGroup]:
    """One group per leaf"""
    return [FeatureGroup(name=name, members=(name, )) for name in catalog.names]


def validate_groups(groups: Sequence[FeatureGroup], catalog: FeatureCatalog):
    """Check that groups partition the leaves of a catalog.

    :raises GroupPartitionError: if a group is empty, a member is unknown, a leaf is
        in more than one group, or a leaf is in none
    """

    if len(groups) == 0:
        raise GroupPartitionError('No feature groups given')

    owner: Dict[str, str] = {}
    names = set()
    for grp in groups:
        if grp.name in names:
            raise GroupPartitionError(f'Duplicate group name {grp.name}')
        names.add(grp.name)

        if len(grp.members) == 0:
            raise GroupPartitionError(f'Group {grp.name} is empty')

        for leaf in grp.members:
            if leaf not in catalog:
                raise GroupPartitionError(f'Group {grp.name}: {leaf} is not a leaf of the {catalog.variant} catalog')
            if leaf in owner:
                raise GroupPartitionError(f'{leaf} is in groups {owner[leaf]} and {grp.name}')
            owner[leaf] = grp.name

    missing = [nn for nn in catalog.names if nn not in owner]
    if len(missing) > 0:
        raise GroupPartitionError(f'Leaves not in any group: {missing[:10]}')


def group_matrix(groups: Sequence[FeatureGroup], catalog: FeatureCatalog) -> npt.NDArray[np.float64]:
    """(groups, leaves) 0/1 membership matrix"""

    gmat = np.zeros((len(groups), len(catalog)), dtype=np.float64)
    for gg, grp in enumerate(groups):
        for leaf in grp.members:
            gmat[gg, catalog.position(leaf)] = 1.0
    return gmat


def phi_from_groups(groups: Sequence[FeatureGroup],
                    selected: Sequence[str],
                    catalog: FeatureCatalog) -> npt.NDArray[np.int8]:
    """Binary vector flagging the leaves of the selected groups.

    :param groups: Feature groups
    :param selected: Names of the groups with phi = 1
    :param catalog: Catalog to align to
    """

    phi = np.zeros(len(catalog), dtype=np.int8)
    known = {grp.name: grp for grp in groups}
    for gname in selected:
        if gname not in known:
            raise KeyError(f'Unknown group {gname}')
        for leaf in known[gname].members:
            phi[catalog.position(leaf)] = 1
    return phi


def read_groups(filename: Union[str, Path], catalog: FeatureCatalog) -> List[FeatureGroup]:
    """Read a groups file.

    One group per line: `name: member member ...`. A member is a leaf name or a
    label, which stands for all leaves with that label. Lines starting with # are
    comments.

    :param filename: Name of the groups file
    :param catalog: Catalog the members refer to

    :returns: Validated list of groups

    :raises GroupPartitionError: if the groups do not partition the catalog
    """

    groups: List[FeatureGroup] = []

    for line in get_file_iter(filename):
        if line.strip() == '':
            continue
        if ':' not in line:
            raise GroupPartitionError(f'{filename}: expected "name: members", got {line}')

        name, rest = line.split(':', 1)
        members: List[str] = []
        for token in rest.split():
            if token in catalog:
                members.append(token)
                continue

            positions = catalog.positions_of_label(token)
            if len(positions) == 0:
                raise GroupPartitionError(f'{filename}: group {name.strip()}: unknown feature {token}')
            members.extend(catalog.names[pos] for pos in positions)

        groups.append(FeatureGroup(name=name.strip(), members=tuple(members)))

    validate_groups(groups, catalog)
    return groups


def write_groups(groups: Sequence[FeatureGroup], filename: Union[str, Path]):
    """Write a groups file readable by read_groups()"""

    with open(filename, 'w') as fh:
        fh.write(comment_lines(['feature groups: name: leaf leaf ...']))
        for grp in groups:
            fh.write(f'{grp.name}: {" ".join(grp.members)}\n')


def resolve_groups(source: Union[str, Path], catalog: FeatureCatalog) -> List[FeatureGroup]:
    """Groups from 'table1' (one group per table row), 'leaves' (one group per leaf) or a groups file"""

    if str(source) == 'table1':
        return default_groups(catalog)
    if str(source) == 'leaves':
        return singleton_groups(catalog)
    return read_groups(source, catalog)
