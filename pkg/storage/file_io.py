import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Iterator, List, TextIO

from shared.exceptions import StorageError

logger = logging.getLogger(__name__)


def ensure_parent_dir(path: str):
    """Create the directory that will hold path"""
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent, exist_ok=True)


@contextmanager
def atomic_writer(path: str) -> Iterator[TextIO]:
    """Context manager for writing a text file that appears only when complete"""
    tmp_path = None
    try:
        ensure_parent_dir(path)
        fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                                        prefix='.tmp-', text=True)
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as handle:
            yield handle
        os.replace(tmp_path, path)
        tmp_path = None
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        raise StorageError(f"Cannot write {path}: {e}") from e
    finally:
        if tmp_path is not None and os.path.exists(tmp_path):
            os.remove(tmp_path)


def read_lines(path: str) -> List[str]:
    """File contents split into lines, without line terminators"""
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return handle.read().splitlines()
    except OSError as e:
        logger.error(f"Error reading {path}: {e}")
        raise StorageError(f"Cannot read {path}: {e}") from e


def read_byte_lines(path: str) -> List[bytes]:
    """Undecoded file lines, so callers can report the line that is not valid UTF-8"""
    try:
        with open(path, 'rb') as handle:
            return handle.read().splitlines()
    except OSError as e:
        logger.error(f"Error reading {path}: {e}")
        raise StorageError(f"Cannot read {path}: {e}") from e
