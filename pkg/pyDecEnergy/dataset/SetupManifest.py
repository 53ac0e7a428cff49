import tomllib

from pathlib import Path
from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Union

from ..constants import BIT_DEPTHS, VARIANTS, VIDEO_FORMATS
from ..Exceptions_custom import DatasetError
from ..metadata.metadata import package_metadata

TOML_ESCAPES = {'\b': '\\b', '\t': '\\t', '\n': '\\n', '\f': '\\f', '\r': '\\r', '"': '\\"', '\\': '\\\\'}


def toml_string(value: str) -> str:
    """TOML basic string literal of value, control characters escaped"""

    out = []
    for ch in value:
        if ch in TOML_ESCAPES:
            out.append(TOML_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7f:
            out.append(f'\\u{ord(ch):04X}')
        else:
            out.append(ch)
    return '"' + ''.join(out) + '"'


class SetupManifest(BaseModel):
    """Declaration of a setup: name, expected record count, bit depth and source"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = Field(min_length=1)
    records: int = Field(ge=0)
    bit_depth: int
    source: str = ''
    variant: str = 'FU'
    format: str = 'SDR'

    @field_validator('bit_depth')
    @classmethod
    def _check_bit_depth(cls, value: int) -> int:
        if value not in BIT_DEPTHS:
            raise ValueError(f'bit_depth must be one of {BIT_DEPTHS}')
        return value

    @field_validator('variant')
    @classmethod
    def _check_variant(cls, value: str) -> str:
        if value not in VARIANTS:
            raise ValueError(f'variant must be one of {VARIANTS}')
        return value

    @field_validator('format')
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in VIDEO_FORMATS:
            raise ValueError(f'format must be one of {VIDEO_FORMATS}')
        return value

    @classmethod
    def read(cls, filename: Union[str, Path]) -> 'SetupManifest':
        """Read a TOML manifest.

        :param filename: Name of the manifest file

        :raises DatasetError: if the file cannot be parsed or a key is invalid
        """

        try:
            with open(filename, 'rb') as fh:
                content = tomllib.load(fh)
        except tomllib.TOMLDecodeError as err:
            raise DatasetError(f'{filename}: invalid manifest ({err})') from err

        try:
            return cls(**content)
        except ValueError as err:
            raise DatasetError(f'{filename}: invalid manifest ({err})') from err

    @classmethod
    def from_setup(cls, name: str, variant: str = 'FU') -> 'SetupManifest':
        """Manifest for one of the known measured setups.

        :param name: Setup name (e.g. Conventional8)
        :param variant: Catalog variant of the counts
        """

        setups = package_metadata()['setups']
        if name not in setups:
            raise DatasetError(f'Unknown setup {name}; known setups are {list(setups)}')

        smeta = setups[name]
        return cls(name=name, records=smeta['bitstreams'], bit_depth=smeta['bit_depth'],
                   source=smeta['source'], variant=variant, format=smeta['format'])

    def to_toml(self) -> str:
        outstr = ''
        for kk, vv in self.model_dump().items():
            if isinstance(vv, str):
                outstr += f'{kk} = {toml_string(vv)}\n'
            else:
                outstr += f'{kk} = {vv}\n'
        return outstr

    def write(self, filename: Union[str, Path]):
        """Write the manifest as TOML"""

        with open(filename, 'w') as fh:
            fh.write(self.to_toml())
