from importlib.metadata import PackageNotFoundError, version

DISTRIBUTION = 'dbs-placement'

try:
    __version__ = version(DISTRIBUTION)
except PackageNotFoundError:
    __version__ = 'unknown'
