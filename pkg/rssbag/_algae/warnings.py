import warnings


class ParameterWarning(UserWarning):
    pass


def clamped(this, to): warnings.warn(f'Clamping {this!r} to {to!r}.', ParameterWarning, stacklevel=3)


def downgraded(this, to, why): warnings.warn(f'Downgrading {this!r} to {to!r}: {why}.', ParameterWarning, stacklevel=3)


def merged(this, into): warnings.warn(f'Merging {this!r} into {into!r}.', ParameterWarning, stacklevel=3)
