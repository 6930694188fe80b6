import math

from numpy import all as npall, isfinite


def isfiniteall(values) -> bool: return bool(npall(isfinite(values)))


def isint(value): return (isinstance(value, int) or hasattr(value, '__index__')) and not isinstance(value, bool)


def isprobability(value): return isinstance(value, (int, float)) and not math.isnan(value) and 0.0 <= value <= 1.0


def raiseif(condition, exception):
    if condition:
        raise exception
