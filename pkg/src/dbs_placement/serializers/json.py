import dataclasses
import json
from pathlib import Path
from typing import Any

import msgspec
import numpy as np


class CustomJSONEncoder(json.JSONEncoder):
    def default(self, o) -> Any:
        try:
            return super(CustomJSONEncoder, self).default(o)
        except TypeError:
            if isinstance(o, np.ndarray):
                return o.tolist()
            elif isinstance(o, np.generic):
                return o.item()
            elif isinstance(o, msgspec.Struct):
                return msgspec.to_builtins(o, enc_hook=_builtins_hook)
            elif dataclasses.is_dataclass(o):
                return dataclasses.asdict(o)
            elif isinstance(o, (Path, type, Exception)):
                return str(o)

        return type(o).__name__


def _builtins_hook(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.generic):
        return obj.item()

    raise NotImplementedError(f'Objects of type {type(obj)} are not supported')
