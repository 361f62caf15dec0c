import json
import os
import logging
import tempfile

from core.errors import InputError
from utils.serialization import dumps

logger = logging.getLogger(__name__)


class FileManager:
    @staticmethod
    def ensure_directory(path) -> bool:
        """Ensures the directory exists. Returns True on success."""
        if not path:
            return True
        try:
            if not os.path.exists(path):
                os.makedirs(path)
            return True
        except OSError as e:
            logger.error(f"Failed to create directory {path}: {e}")
            return False

    @staticmethod
    def write_json(path, document) -> bool:
        """Writes a JSON document atomically (temp file + rename). Returns True on success."""
        directory = os.path.dirname(os.path.abspath(path))
        if not FileManager.ensure_directory(directory):
            return False
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=directory)
        try:
            with os.fdopen(fd, 'w', encoding='utf-8') as f:
                f.write(dumps(document))
            os.replace(tmp, path)
            return True
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            if os.path.exists(tmp):
                os.remove(tmp)
            return False

    @staticmethod
    def read_json(path):
        """Reads a JSON document; missing or malformed files raise InputError."""
        if not os.path.exists(path):
            raise InputError(f"file not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path} is not valid JSON: {e}") from e
        except OSError as e:
            raise InputError(f"cannot read {path}: {e}") from e
