from .FeatureGroup import (FeatureGroup, default_groups, read_groups, resolve_groups, singleton_groups, validate_groups,
                           write_groups)
from .ZetaSweep import ZetaSweepResult, read_curve, sweep_zeta, write_curve
from .PhiSearch import PhiSearchResult, read_phi, resolve_phi, search_phi, table1_phi

__all__ = ['FeatureGroup', 'default_groups', 'read_groups', 'resolve_groups', 'singleton_groups', 'validate_groups', 'write_groups',
           'ZetaSweepResult', 'read_curve', 'sweep_zeta', 'write_curve',
           'PhiSearchResult', 'read_phi', 'resolve_phi', 'search_phi', 'table1_phi']
