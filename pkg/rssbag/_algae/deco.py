from __future__ import annotations

from functools import wraps
from typing import Tuple, Type, Union

Catchable = Union[Type[Exception], Tuple[Type[Exception], ...]]


def annotateexception(prefix: str, exc: Catchable):
    """Re-raises `exc` as the same type with `prefix`, formatted with the call's arguments, prepended."""
    def decorator(method):
        @wraps(method)
        def wrapper(*args, **kwargs):
            try:
                return method(*args, **kwargs)
            except exc as error:
                annotated = type(error)(f'{prefix.format(*args, **kwargs)} {error}')
                annotated.__dict__.update(error.__dict__)
                raise annotated from error

        return wrapper

    return decorator
