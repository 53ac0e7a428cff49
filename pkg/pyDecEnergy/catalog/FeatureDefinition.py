from typing import NamedTuple, Optional

from ..constants import CATEGORIES, DEPTH_DELIM


class FeatureDefinition(NamedTuple):
    """A single leaf feature of the energy model.

    A leaf is one label at one depth (or the label alone for depth-independent
    features). The row is the table row the leaf was expanded from.
    """

    label: str
    category: str
    depth: Optional[int]
    phi: int
    in_fa: bool
    in_fu: bool
    counting_rule: str
    row: str

    @property
    def name(self) -> str:
        """Leaf name used for CSV headers and model files.

        :returns: `<label>` or `<label>@<depth>`
        """
        if self.depth is None:
            return self.label
        return f'{self.label}{DEPTH_DELIM}{self.depth}'

    def validate(self):
        """Check the leaf definition.

        :raises ValueError: if category, depth or phi is invalid
        """

        if self.category not in CATEGORIES:
            raise ValueError(f'{self.name}: category must be one of {CATEGORIES}')
        if self.depth is not None and not 0 <= self.depth <= 4:
            raise ValueError(f'{self.name}: depth must be within 0..4')
        if self.phi not in (0, 1):
            raise ValueError(f'{self.name}: phi must be 0 or 1')


def parse_leaf_name(name: str):
    """Split a leaf name into label and depth.

    :param name: Leaf name (`label` or `label@depth`)

    :returns: (label, depth) where depth is None for depth-free leaves
    """

    if DEPTH_DELIM in name:
        label, depth = name.rsplit(DEPTH_DELIM, 1)
        return label, int(depth)
    return name, None
