import os
import zlib

import numpy as np

SIGNIFICANT_DIGITS = 17


def fmt_number(value) -> str:
    """Fixed 17-significant-digit rendering shared by every output document."""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"Non-finite number cannot be serialized: {value}")
    text = format(value, f".{SIGNIFICANT_DIGITS}g")
    if not any(c in text for c in '.en'):
        text += '.0'
    return text


def seeded_rng(seed: int, name: str) -> np.random.Generator:
    """Generator determined by (seed, name) only."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def expand_user(file):
    if not isinstance(file, str) or not file.startswith('~'):
        return file

    return os.path.expanduser(file)
