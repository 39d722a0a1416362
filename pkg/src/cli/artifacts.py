import json
import logging
from typing import Any

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; complex numbers become [re, im]"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value) or np.isinf(value):
            return None
        return value
    return value


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT)


def write_csv(frame: pd.DataFrame, path: str) -> str:
    with open(path, 'w', newline='') as file:
        file.write(frame_to_csv(frame))
    logger.info(f"Wrote {path}")
    return path


def dump_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=False) + '\n'


def write_json(data: Any, path: str) -> str:
    with open(path, 'w') as file:
        file.write(dump_json(data))
    logger.info(f"Wrote {path}")
    return path


def write_lines(lines, path: str) -> str:
    with open(path, 'w') as file:
        for line in lines:
            file.write(line + '\n')
    logger.info(f"Wrote {path}")
    return path
