"""Complex arrays in JSON and deterministic JSON text"""
import json
import os
import sys
from typing import Any, Optional

import numpy as np

from pyseqpt.exceptions import ConfigError
from pyseqpt.util import mkdir_if_not_exists


def complex_to_list(array) -> list:
    """Nested lists with every complex entry as [re, im]"""
    array = np.asarray(array, dtype=complex)
    return np.stack([array.real, array.imag], axis=-1).tolist()


def list_to_complex(data) -> np.ndarray:
    """Inverse of complex_to_list"""
    try:
        array = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"complex entries must be numeric [re, im] pairs: {err}") from err
    if array.ndim == 0 or array.shape[-1] != 2:
        raise ConfigError("complex entries must be [re, im] pairs")
    return array[..., 0] + 1j * array[..., 1]


def to_json(data: Any) -> str:
    """Sorted keys and repr floats, identical input gives identical text"""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_text(text: str, path: Optional[str]) -> str:
    """Write to path, or to stdout when no path is given"""
    if path:
        mkdir_if_not_exists(os.path.dirname(path))
        with open(path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return text


def load_json(path: str) -> Any:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read '{path}': {err}") from err
