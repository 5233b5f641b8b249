"""
Utility functions for CSV row and field handling.

This module provides low-level utilities for:
- Normalizing line endings and blank lines
- Splitting text into rows and rows into fields
- Strict numeric field conversion with row/column context
"""

import csv
from io import StringIO
from typing import List

import numpy as np

from src.exceptions import DomainError


def normalize_csv_text(raw_text: str) -> str:
    """
    Normalize raw CSV text: consistent line endings, no blank lines.

    Args:
        raw_text: Raw CSV document as string

    Returns:
        Normalized text with one record per line
    """
    normalized = raw_text.strip().replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.strip() for line in normalized.split("\n") if line.strip()]
    return "\n".join(lines)


def split_rows(text: str) -> List[List[str]]:
    """
    Split CSV text into rows of stripped fields.

    Example:
        >>> split_rows("t,x1\\n0,0.5")
        [['t', 'x1'], ['0', '0.5']]
    """
    reader = csv.reader(StringIO(normalize_csv_text(text)))
    return [[field.strip() for field in row] for row in reader]


def parse_float(field: str, row: int, column: str) -> float:
    """
    Convert one field to a finite float.

    Raises:
        DomainError: If the field is empty, not numeric or not finite
    """
    try:
        value = float(field)
    except ValueError:
        raise DomainError(f"row {row}, column '{column}': '{field}' is not a number") from None
    if not np.isfinite(value):
        raise DomainError(f"row {row}, column '{column}': non-finite value '{field}'")
    return value


def rows_to_matrix(rows: List[List[str]], header: List[str], first_row: int = 2) -> np.ndarray:
    """
    Convert data rows to a float matrix, checking the field count of each row.

    Args:
        rows: Data rows (header excluded)
        header: Column names, used in error messages
        first_row: 1-based line number of the first data row

    Returns:
        Array of shape (len(rows), len(header))
    """
    matrix = np.empty((len(rows), len(header)))
    for offset, row in enumerate(rows):
        line = first_row + offset
        if len(row) != len(header):
            raise DomainError(f"row {line}: expected {len(header)} fields, found {len(row)}")
        for j, field in enumerate(row):
            matrix[offset, j] = parse_float(field, line, header[j])
    return matrix


def value_columns(header: List[str], start: int) -> int:
    """
    Check that header[start:] reads x1, x2, ..., xd and return d.

    Raises:
        DomainError: If the value columns are missing or misnamed
    """
    names = header[start:]
    expected = [f"x{j}" for j in range(1, len(names) + 1)]
    if not names or names != expected:
        raise DomainError(f"expected value columns {expected or ['x1', '...']}, found {names}")
    return len(names)
