from pathlib import Path
from typing import Generator


def iter_files(root: Path, recursive: bool = True, suffix: str | None = None) -> Generator[Path, None, None]:
    for item in sorted(root.iterdir()):
        if item.is_file():
            if suffix is None or item.suffix == suffix:
                yield item
        elif item.is_dir() and recursive and not item.name.startswith('.'):
            yield from iter_files(item, recursive, suffix)


def ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)

    return path
