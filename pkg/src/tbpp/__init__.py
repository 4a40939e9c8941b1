from importlib.metadata import PackageNotFoundError, version  # pragma: no cover
from pathlib import Path

try:
    dist_name = "TBPP-check"
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    # frozen or source checkouts ship the version next to the package
    version_file = Path(__file__).with_name('data') / 'version'
    __version__ = version_file.read_text().strip() if version_file.exists() else "unknown"
finally:
    del version, PackageNotFoundError
