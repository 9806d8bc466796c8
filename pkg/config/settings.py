"""Application settings and constants for the fermionic control simulator."""

import configparser
import os
from pathlib import Path

from dotenv import load_dotenv

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# Defaults live in config.ini; environment variables override them
_INI = configparser.ConfigParser()
_INI.read(BASE_DIR / 'config.ini')


def _setting(section: str, key: str, env: str, fallback: str) -> str:
    """Look up a setting: environment first, then config.ini, then fallback."""
    value = os.getenv(env)
    if value is not None:
        return value
    return _INI.get(section, key, fallback=fallback)


# Output directories
OUTPUT_DIR = os.getenv('OUTPUT_DIR', BASE_DIR / 'output')

# Size limits
MAX_LEVELS = int(_setting('limits', 'max_levels', 'MAX_LEVELS', '16'))
DENSE_LEVEL_LIMIT = int(_setting('limits', 'dense_level_limit', 'DENSE_LEVEL_LIMIT', '12'))
MAX_QUBITS = int(_setting('limits', 'max_qubits', 'MAX_QUBITS', '8'))

# Numerical tolerances
HERMITIAN_TOL = float(_setting('tolerances', 'hermitian', 'HERMITIAN_TOL', '1e-10'))
UNITARY_TOL = float(_setting('tolerances', 'unitary', 'UNITARY_TOL', '1e-10'))
DEFAULT_FIDELITY_TOL = float(_setting('tolerances', 'fidelity', 'FIDELITY_TOL', '1e-6'))
DEFAULT_LEAKAGE_TOL = float(_setting('tolerances', 'leakage', 'LEAKAGE_TOL', '1e-8'))
DEFAULT_RESIDUAL_TOL = float(_setting('tolerances', 'residual', 'RESIDUAL_TOL', '1e-9'))

# Compiler settings
DEFAULT_COUPLING = float(_setting('compiler', 'coupling', 'COUPLING', '1.0'))
DEFAULT_SEED = int(_setting('compiler', 'seed', 'SEED', '20240601'))
PROBE_STATES = int(_setting('compiler', 'probe_states', 'PROBE_STATES', '4'))

# Report settings
REPORT_FORMATS = ['json', 'txt', 'html']
DEFAULT_REPORT_FORMAT = _setting('reports', 'default_format', 'DEFAULT_REPORT_FORMAT', 'json')

# Logging settings
LOG_LEVEL = _setting('logging', 'level', 'LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Supported circuit file formats
SUPPORTED_CIRCUIT_EXTENSIONS = ['.circ', '.txt']
