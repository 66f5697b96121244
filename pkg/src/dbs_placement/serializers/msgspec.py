import logging
from typing import Any

import numpy as np
from msgspec import msgpack
from msgspec.msgpack import Ext

logger = logging.getLogger(__name__)

NDARRAY_EXT_CODE = 1


def enc_hook(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        header = msgpack.encode((obj.dtype.str, obj.shape))

        return Ext(NDARRAY_EXT_CODE, len(header).to_bytes(4, 'big') + header + np.ascontiguousarray(obj).tobytes())
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)

    raise NotImplementedError(f'Objects of type {type(obj)} are not supported')


def ext_hook(code: int, data: memoryview) -> Any:
    if code == NDARRAY_EXT_CODE:
        raw = data.tobytes()
        header_size = int.from_bytes(raw[:4], 'big')
        dtype, shape = msgpack.decode(raw[4:4 + header_size])

        return np.frombuffer(raw[4 + header_size:], dtype=np.dtype(dtype)).reshape(shape)

    raise NotImplementedError(f'Extension type code {code} is not supported')


MSGPACK_ENCODER = msgpack.Encoder(enc_hook=enc_hook)
MSGPACK_DECODER = msgpack.Decoder(ext_hook=ext_hook)


def serialize_msgpack(data) -> bytes:
    result = MSGPACK_ENCODER.encode(data)

    return result


def deserialize_msgpack(data: bytes, data_type=None):
    if data_type:
        result = msgpack.decode(data, type=data_type, ext_hook=ext_hook)
    else:
        result = MSGPACK_DECODER.decode(data)

    return result
