"""Data access object for designs"""
from pathlib import Path
from typing import Optional

import joblib
import numpy as np
from loguru import logger

from pyseqpt.dao.serialize import complex_to_list, list_to_complex, load_json, to_json, write_text
from pyseqpt.exceptions import ConfigError
from pyseqpt.model.structures import WeightedDesign
from pyseqpt.util import mkdir_if_not_exists


def design_to_dict(design: WeightedDesign) -> dict:
    """{scheme, d, factor_dims, states, probabilities, survival_meta}, plus the factor states of tensor designs"""
    data = {
        "scheme": design.scheme,
        "d": design.d,
        "factor_dims": list(design.factor_dims),
        "states": complex_to_list(design.states),
        "probabilities": design.probabilities.tolist(),
        "survival_meta": [[list(pair) for pair in meta] for meta in design.survival_meta],
    }
    if design.n_factors > 1:
        data["factor_states"] = [complex_to_list(s) for s in design.factor_states]
        data["factor_index"] = design.factor_index.tolist()
    return data


def design_from_dict(data: dict) -> WeightedDesign:
    try:
        states = list_to_complex(data["states"])
        factor_states = (
            [list_to_complex(s) for s in data["factor_states"]]
            if "factor_states" in data
            else [states]
        )
        factor_index = (
            np.asarray(data["factor_index"], dtype=np.int64)
            if "factor_index" in data
            else np.arange(len(states))[:, None]
        )
        return WeightedDesign(
            d=int(data["d"]),
            states=states,
            probabilities=np.asarray(data["probabilities"], dtype=float),
            survival_meta=[tuple(tuple(pair) for pair in meta) for meta in data["survival_meta"]],
            factor_dims=[int(D) for D in data["factor_dims"]],
            scheme=data["scheme"],
            factor_states=factor_states,
            factor_index=factor_index,
        )
    except KeyError as err:
        raise ConfigError(f"design file lacks field {err}") from err


def write_design(path: Optional[str], design: WeightedDesign) -> str:
    """
    Write a design as JSON, or as a joblib pickle when the path ends in .pcl
    """
    if path and Path(path).suffix == ".pcl":
        logger.info("Write design cache to {}", path)
        mkdir_if_not_exists(str(Path(path).parent))
        with open(path, "wb") as handle:
            joblib.dump(design, handle)
        return ""
    return write_text(to_json(design_to_dict(design)), path)


def read_design(path: str) -> WeightedDesign:
    """Read a design written by write_design"""
    if Path(path).suffix == ".pcl":
        logger.debug("Loading design cache '{}'", path)
        with open(path, "rb") as handle:
            return joblib.load(handle)
    return design_from_dict(load_json(path))
