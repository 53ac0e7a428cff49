from typing import Dict, List, Tuple

# Model variants
VARIANTS: List[str] = ['FA', 'FU']

# Feature categories in Table order
CATEGORIES: List[str] = ['General', 'Intra', 'Inter', 'Residual', 'InLoop']

# Leaf naming: <label> for depth-free features, <label>@<depth> otherwise
DEPTH_DELIM: str = '@'

# Initialization energy is a feature counted once per decoded bit stream
INIT_FEATURE: str = 'E_O'

# Encoding grid of the measured corpora
QP_VALUES: List[int] = [22, 27, 32, 37]
CODING_CONFIGS: List[str] = ['intra', 'lowdelay', 'lowdelayP', 'randomaccess']
BIT_DEPTHS: List[int] = [8, 10]
VIDEO_FORMATS: List[str] = ['SDR', 'HDR', 'Fisheye', 'ERP', 'PERP', 'CMP', 'EAC', 'ACP', 'RSP']

# Training objectives
OBJECTIVES: Dict[str, str] = {'abs': 'absolute_lsq',
                              'rel': 'relative_weighted_lsq'}

# Default zeta grid (start, stop, step)
ZETA_GRID_DEFAULT: Tuple[float, float, float] = (0.0, 1.5, 0.01)

# Subset enumeration over this many groups or more prints a warning
PHI_SEARCH_WARN_GROUPS: int = 20

# CSV layout
ID_COLUMN: str = 'id'
ENERGY_COLUMN: str = 'energy_joules'
META_COLUMNS: List[str] = ['setup', 'sequence', 'qp', 'config', 'bit_depth', 'format', 'frames']

# Model file layout
MODEL_HDR: str = 'leaf,coefficient'
COMMENT_CHAR: str = '#'

# Curve file layout
CURVE_HDR: str = 'zeta,mean_error'
CURVE_PERCENT_HDR: str = 'zeta,mean_error_percent'

# CLI exit codes
EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_DATA: int = 2
EXIT_CONVERGENCE: int = 3
