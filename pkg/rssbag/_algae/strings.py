import re

flag = re.compile(r'[\-\s]+')


def envname(prefix, value): return ''.join([prefix, flag.sub('_', value.strip('-')).upper()])
