import functools
import io
import pkgutil
import xml.etree.ElementTree as xmlET   # type: ignore
from typing import Dict, Optional

from ..constants import CATEGORIES

MetaDataType = Dict[str, Dict]

outside_elem = {'features': 'feature_row',
                'setups': 'setup'}


class MetaData(object):
    """Class to handle the feature table and setup metadata shipped with the package"""

    def __init__(self, verbose: Optional[bool] = False):
        fcn_map = {'features': self.__features_to_dict,
                   'setups': self.__setups_to_dict}

        self.__meta_dict: MetaDataType = {}
        self.__verbose = verbose

        for mt, mf in fcn_map.items():
            xml_fh = io.StringIO(pkgutil.get_data('pyDecEnergy', f'xml/{mt}.xml').decode('utf-8'))
            xml_tree = xmlET.parse(xml_fh)
            xml_root = xml_tree.getroot()

            self.__meta_dict[mt] = mf(xml_root, mt)

    @property
    def metadata(self) -> MetaDataType:
        return self.__meta_dict

    def __features_to_dict(self, xml_root, meta_type) -> Dict:
        """Convert the feature rows to a dictionary keyed by row id.

        Dictionary insertion order is the table row order.
        """

        meta_dict: Dict = {}

        for elem in xml_root.findall(outside_elem[meta_type]):
            name = elem.attrib.get('id')
            category = elem.attrib.get('category')

            if category not in CATEGORIES:
                raise ValueError(f'{name}: unknown category {category}')

            meta_dict[name] = {'category': category,
                               'in_fa': elem.attrib.get('fa') != '0',
                               'fa_merged': elem.attrib.get('fa') == 'merged',
                               'in_fu': elem.attrib.get('fu') == '1',
                               'phi': int(elem.attrib.get('phi')),
                               'description': elem.find('desc').text,
                               'depths': None,
                               'leaves': {}}

            depths = elem.find('depths')
            if depths is not None:
                meta_dict[name]['depths'] = (int(depths.attrib.get('min')), int(depths.attrib.get('max')))

            for cleaf in elem.findall('./leaf'):
                meta_dict[name]['leaves'][cleaf.attrib.get('label')] = cleaf.text

            merged = elem.find('merged')
            if merged is not None:
                meta_dict[name]['merged'] = {merged.attrib.get('label'): merged.text}

            if self.__verbose:   # pragma: no cover
                print(f'{name}: {len(meta_dict[name]["leaves"])} labels')

        return meta_dict

    @staticmethod
    def __setups_to_dict(xml_root, meta_type) -> Dict:
        """Convert setup metadata to dictionary"""

        meta_dict: Dict = {}

        for elem in xml_root.findall(outside_elem[meta_type]):
            name = elem.attrib.get('name')

            elems = {'sequences': int,
                     'bitstreams': int,
                     'bit_depth': int,
                     'format': str,
                     'source': str}

            meta_dict[name] = {ek: ev(elem.find(ek).text) for ek, ev in elems.items()}

        return meta_dict


@functools.cache
def package_metadata() -> MetaDataType:
    """Parsed package metadata, read once per process"""
    return MetaData(verbose=False).metadata
