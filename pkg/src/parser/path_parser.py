"""
Path CSV Parser

Reads sampled paths from CSV into ``Path`` values.

Two layouts are accepted:
- single path:   header ``t,x1,...,xd``, one row per sample
- stacked paths: header ``path_id,t,x1,...,xd``; rows of one path are
  contiguous and path ids appear in first-seen order

Parsing is strict: non-numeric fields, ragged rows and non-increasing
times are rejected with the offending row number.
"""

import logging
from pathlib import Path as FilePath
from typing import Dict, List

import numpy as np

from src.exceptions import DomainError
from src.signature.signature_engine import Path
from .csv_utils import rows_to_matrix, split_rows, value_columns

logger = logging.getLogger(__name__)


class PathParser:
    """
    Converts Path CSV documents into lists of ``Path`` values.

    Example:
        >>> parser = PathParser()
        >>> paths = parser.parse_file("samples/axis_path.csv")
        >>> paths[0].d
        2
    """

    def __init__(self):
        """Initialize the parser."""
        self.header: List[str] = []
        self.path_ids: List[str] = []
        self.paths: List[Path] = []

    def parse_file(self, file_path: str) -> List[Path]:
        """
        Parse a Path CSV file from disk.

        Raises:
            FileNotFoundError: If the file doesn't exist
            DomainError: If the file is empty or malformed
        """
        path = FilePath(file_path)
        if not path.exists():
            raise FileNotFoundError(f"path file not found: {file_path}")

        raw_text = path.read_text(encoding="utf-8")
        if not raw_text.strip():
            raise DomainError(f"path file is empty: {file_path}")

        logger.debug(f"Parsing path CSV {file_path}")
        return self.parse_text(raw_text)

    def parse_text(self, csv_text: str) -> List[Path]:
        """
        Parse Path CSV text.

        Returns:
            List of paths (length 1 for the single-path layout)
        """
        rows = split_rows(csv_text)
        if len(rows) < 3:
            raise DomainError("path CSV needs a header and at least two sample rows")

        self.header = rows[0]
        if self.header[0] == "path_id":
            self.paths = self._parse_stacked(rows)
        elif self.header[0] == "t":
            d = value_columns(self.header, 1)
            matrix = rows_to_matrix(rows[1:], self.header)
            self._check_monotone(matrix[:, 0], first_row=2)
            self.path_ids = ["0"]
            self.paths = [Path(matrix[:, 0], matrix[:, 1:1 + d])]
        else:
            raise DomainError(f"path CSV header must start with 't' or 'path_id', found '{self.header[0]}'")

        return self.paths

    def _parse_stacked(self, rows: List[List[str]]) -> List[Path]:
        """Split a stacked document into per-path blocks."""
        if len(self.header) < 3 or self.header[1] != "t":
            raise DomainError("stacked path CSV header must read path_id,t,x1,...")
        d = value_columns(self.header, 2)

        blocks: Dict[str, List[int]] = {}
        order: List[str] = []
        previous = None
        for line, row in enumerate(rows[1:], start=2):
            if not row or not row[0]:
                raise DomainError(f"row {line}: missing path_id")
            key = row[0]
            if key != previous and key in blocks:
                raise DomainError(f"row {line}: rows of path '{key}' are not contiguous")
            if key not in blocks:
                blocks[key] = []
                order.append(key)
            blocks[key].append(line)
            previous = key

        paths = []
        for key in order:
            lines = blocks[key]
            block_rows = [rows[line - 1][1:] for line in lines]
            matrix = rows_to_matrix(block_rows, self.header[1:], first_row=lines[0])
            self._check_monotone(matrix[:, 0], first_row=lines[0])
            if matrix.shape[0] < 2:
                raise DomainError(f"path '{key}' has fewer than two samples")
            paths.append(Path(matrix[:, 0], matrix[:, 1:1 + d]))

        self.path_ids = order
        return paths

    @staticmethod
    def _check_monotone(times: np.ndarray, first_row: int) -> None:
        steps = np.diff(times)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0)) + first_row + 1
            raise DomainError(f"row {bad}: time is not strictly increasing")

    def is_stacked(self) -> bool:
        return bool(self.header) and self.header[0] == "path_id"

    def values_array(self) -> np.ndarray:
        """
        Stack parsed paths into an (N, L + 1, d) array.

        Raises:
            DomainError: If the paths have different lengths or dimensions
        """
        shapes = {p.values.shape for p in self.paths}
        if len(shapes) != 1:
            raise DomainError(f"paths have differing shapes {sorted(shapes)}")
        return np.stack([p.values for p in self.paths])

    def __repr__(self) -> str:
        if not self.paths:
            return "PathParser(unparsed)"
        return f"PathParser(paths={len(self.paths)}, d={self.paths[0].d})"
