"""
Unit tests for the CSV parsers.

Tests cover:
- Row splitting and numeric field conversion
- Single and stacked Path CSV layouts
- Row-numbered errors for malformed input
- TailCurve CSV reading
- Formatter output read back by the parsers
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.exceptions import DomainError
from src.experiments.statistics import TailCurve
from src.parser.csv_utils import normalize_csv_text, parse_float, split_rows
from src.parser.curve_parser import TailCurveParser
from src.parser.path_parser import PathParser
from src.reporting.formatters import PathCSVFormatter, TailCurveCSVFormatter
from src.signature.signature_engine import Path as SamplePath
from src.signature.signature_engine import path_signature


def test_normalize_csv_text():
    """Test line-ending normalization and blank-line removal."""
    raw = "  t,x1\r\n\r\n0,1  \r\n1,2\n\n"
    assert normalize_csv_text(raw) == "t,x1\n0,1\n1,2"
    print("✓ test_normalize_csv_text passed")


def test_split_rows():
    """Test splitting into stripped fields."""
    rows = split_rows("t, x1\n0 ,0.5")
    assert rows == [["t", "x1"], ["0", "0.5"]]
    print("✓ test_split_rows passed")


def test_parse_float():
    assert parse_float("1e-3", 2, "x1") == 0.001
    with pytest.raises(DomainError, match="row 4, column 'x2'"):
        parse_float("abc", 4, "x2")
    with pytest.raises(DomainError, match="non-finite"):
        parse_float("nan", 3, "t")


def test_parse_axis_path():
    """Test parsing the single-path sample file."""
    parser = PathParser()
    paths = parser.parse_file("samples/axis_path.csv")

    assert len(paths) == 1
    assert paths[0].d == 2
    assert paths[0].n_segments == 2
    assert not parser.is_stacked()
    np.testing.assert_array_equal(paths[0].times, [0.0, 1.0, 2.0])

    sig = path_signature(paths[0], 2)
    assert sig.coefficient((1, 2)) == 1.0
    assert sig.coefficient((2, 1)) == 0.0
    print("✓ test_parse_axis_path passed")


def test_parse_stacked_paths():
    """Test the stacked layout keeps path ids in file order."""
    parser = PathParser()
    paths = parser.parse_file("samples/two_paths.csv")

    assert parser.is_stacked()
    assert parser.path_ids == ["axis", "loop"]
    assert [p.n_segments for p in paths] == [2, 4]

    loop = path_signature(paths[1], 2)
    assert loop.coefficient((1, 2)) == pytest.approx(1.0)
    assert loop.coefficient((2, 1)) == pytest.approx(-1.0)
    assert loop.coefficient((1,)) == pytest.approx(0.0)
    print("✓ test_parse_stacked_paths passed")


def test_values_array():
    parser = PathParser()
    parser.parse_text("path_id,t,x1\na,0,0\na,1,1\nb,0,2\nb,1,3\n")
    assert parser.values_array().shape == (2, 2, 1)

    parser.parse_text("path_id,t,x1\na,0,0\na,1,1\nb,0,2\nb,1,3\nb,2,4\n")
    with pytest.raises(DomainError, match="differing shapes"):
        parser.values_array()


@pytest.mark.parametrize(
    "text,message",
    [
        ("t,x1\n0,0\n1,abc\n", "row 3, column 'x1'"),
        ("t,x1\n0,0\n0,1\n", "row 3: time is not strictly increasing"),
        ("t,x1\n0,0\n1,1,2\n", "row 3: expected 2 fields"),
        ("path_id,t,x1\na,0,0\nb,0,1\nb,1,1\na,1,2\n", "rows of path 'a' are not contiguous"),
        ("time,x1\n0,0\n1,1\n", "must start with 't' or 'path_id'"),
        ("t,y1\n0,0\n1,1\n", "expected value columns"),
        ("t,x1\n0,0\n", "at least two sample rows"),
        ("path_id,t,x1\na,0,0\na,1,1\nb,0,2\n", "fewer than two samples"),
    ],
)
def test_malformed_path_csv(text, message):
    """Test each malformed document is rejected with its row context."""
    with pytest.raises(DomainError, match=message):
        PathParser().parse_text(text)


def test_missing_and_empty_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        PathParser().parse_file(tmp_path / "absent.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("\n\n", encoding="utf-8")
    with pytest.raises(DomainError, match="empty"):
        PathParser().parse_file(str(empty))


def test_parse_tail_curves():
    """Test reading the sample tail curve file."""
    parser = TailCurveParser()
    curves = parser.parse_file("samples/tail_curves.csv")

    assert len(curves) == 1
    curve = curves[0]
    assert curve.label == "S_1"
    assert curve.sample_count == 1000
    assert len(curve) == 5
    assert curve.survival[0] == pytest.approx(0.617)
    print("✓ test_parse_tail_curves passed")


def test_tail_curve_errors():
    with pytest.raises(DomainError, match="header"):
        TailCurveParser().parse_text("label,t,survival\nA,1,0.5\n")
    mixed = (
        "label,threshold,survival,std_err,sample_count\n"
        "A,1,0.5,0.01,100\n"
        "A,2,0.2,0.01,200\n"
    )
    with pytest.raises(DomainError, match="mixes sample counts"):
        TailCurveParser().parse_text(mixed)
    rising = (
        "label,threshold,survival,std_err,sample_count\n"
        "A,1,0.2,0.01,100\n"
        "A,2,0.5,0.01,100\n"
    )
    with pytest.raises(DomainError, match="non-increasing"):
        TailCurveParser().parse_text(rising)


def test_path_formatter_read_back():
    """Formatted paths parse back to identical values."""
    rng = np.random.default_rng(0)
    paths = [
        SamplePath(np.linspace(0.0, 1.0, 6), rng.standard_normal((6, 3)))
        for _ in range(3)
    ]
    parser = PathParser()
    parsed = parser.parse_text(PathCSVFormatter.format_stacked(paths, ["p0", "p1", "p2"]))

    assert parser.path_ids == ["p0", "p1", "p2"]
    for original, read_back in zip(paths, parsed):
        np.testing.assert_array_equal(original.values, read_back.values)
        np.testing.assert_array_equal(original.times, read_back.times)

    single = parser.parse_text(PathCSVFormatter.format_single(paths[0]))[0]
    np.testing.assert_array_equal(single.values, paths[0].values)


def test_tail_curve_formatter_read_back():
    curves = [
        TailCurve([0.5, 1.0, 2.0], [0.6, 0.3, 0.01], [0.01, 0.01, 0.001], 5000, "S(1,2)"),
        TailCurve([1.0, 2.0], [0.2, 0.1], [0.0, 0.0], 0, "reference k=2"),
    ]
    parsed = TailCurveParser().parse_text(TailCurveCSVFormatter.format_report(curves))

    assert [c.label for c in parsed] == ["S(1,2)", "reference k=2"]
    np.testing.assert_array_equal(parsed[0].survival, curves[0].survival)
    assert parsed[1].sample_count == 0
