from typing import NamedTuple, Optional

from ..constants import BIT_DEPTHS, CODING_CONFIGS, QP_VALUES, VIDEO_FORMATS
from ..Exceptions_custom import InvalidValueError


class BitstreamMeta(NamedTuple):
    """Metadata of one measured bit stream.

    qp and config are None when the ingested data does not carry them.
    """

    id: str
    setup: str
    sequence: str
    qp: Optional[int]
    config: Optional[str]
    bit_depth: int
    format: str
    frames: Optional[int] = None

    def validate(self):
        """Check the metadata against the encoding grid.

        :raises InvalidValueError: if a field is outside its allowed values
        """

        if self.qp is not None and self.qp not in QP_VALUES:
            raise InvalidValueError(f'{self.id}: qp must be one of {QP_VALUES}; got {self.qp}')
        if self.config is not None and self.config not in CODING_CONFIGS:
            raise InvalidValueError(f'{self.id}: config must be one of {CODING_CONFIGS}; got {self.config}')
        if self.bit_depth not in BIT_DEPTHS:
            raise InvalidValueError(f'{self.id}: bit_depth must be one of {BIT_DEPTHS}; got {self.bit_depth}')
        if self.format not in VIDEO_FORMATS:
            raise InvalidValueError(f'{self.id}: format must be one of {VIDEO_FORMATS}; got {self.format}')
        if self.frames is not None and self.frames < 1:
            raise InvalidValueError(f'{self.id}: frames must be positive; got {self.frames}')

    @property
    def pairing_key(self):
        """Key used to pair 8-bit and 10-bit encodings of the same material"""
        return (self.sequence, self.format, self.qp, self.config)
