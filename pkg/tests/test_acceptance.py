"""
Full-size statistical runs of the sample configs.

These take minutes and are deselected by default; run them with

    pytest -m slow
"""

import sys
from pathlib import Path

import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.configs.config_loader import ConfigLoader
from src.harness.runner import run
from src.reporting.report_generator import ReportGenerator

pytestmark = pytest.mark.slow


def _run(name, **overrides):
    config = ConfigLoader().load_validated(f"samples/configs/{name}.json", overrides or None)
    outcome = run(config)
    return outcome, {check.check_id: check for check in outcome.checks.checks}


def test_brownian_level2_variance():
    outcome, checks = _run("variance_bm")
    assert checks["variance.second_moment"].passed
    assert outcome.results["moments"]["reference"] == pytest.approx(0.5)


def test_brownian_level3_variance():
    outcome, checks = _run("variance_bm_level3")
    moment = outcome.results["moments"]["second_moment"]
    assert moment == pytest.approx(1.0 / 6.0, rel=0.05)
    assert checks["variance.second_moment"].passed


def test_levy_area_second_moment():
    outcome, checks = _run("levyarea_bm")
    assert checks["levyarea.second_moment"].passed
    assert outcome.results["levy_area"]["reference"] == pytest.approx(0.25)


def test_level1_tail_exponent():
    outcome, checks = _run("tail_level1")
    assert 1.8 <= checks["tail.alpha"].observed <= 2.2
    assert checks["tail.alpha"].passed
    assert checks["tail.r_squared"].passed
    assert outcome.svg is not None


def test_levy_area_tail_exponent():
    _, checks = _run("tail_levy_area")
    assert 0.8 <= checks["tail.alpha"].observed <= 1.2
    assert checks["tail.alpha"].passed
    assert checks["tail.r_squared"].passed


def test_fbm_scaling():
    _, checks = _run("scaling_fbm")
    check = checks["scaling.ratio.H0.75"]
    assert check.passed
    assert check.expected == pytest.approx([0.9 * 8.0, 1.1 * 8.0])


def test_ou_area_flags_published_form():
    """The published closed form is reported, a mismatch only warns."""
    outcome, checks = _run("ouarea_theta1")
    assert checks["ouarea.extrapolated"].passed
    assert checks["ouarea.published"].severity == "WARNING"
    assert outcome.results["ou_area"]["published_closed_form"] == pytest.approx(0.032756, abs=1e-6)
    assert outcome.checks.status() in ("PASS", "PASS_WITH_WARNINGS")


def test_hypercontractivity():
    _, checks = _run("hyper_levy_area")
    assert all(checks[f"hyper.p{p}"].passed for p in (3, 4, 6))


def test_small_ball():
    _, checks = _run("smallball_levy_area")
    small_ball = [check for name, check in checks.items() if name.startswith("smallball.")]
    assert len(small_ball) == 6
    assert all(check.passed for check in small_ball)


@pytest.mark.parametrize("name", ["meanconc_signature", "meanconc_log_signature"])
def test_mean_concentration_slope(name):
    _, checks = _run(name)
    assert -0.65 <= checks["meanconc.slope"].observed <= -0.35


@pytest.mark.parametrize("m", [3, 4])
def test_bch_lipschitz_growth(m):
    _, checks = _run("bchprobe_m3", m=m)
    assert checks["bchprobe.slope"].passed


def test_repeat_is_byte_identical(tmp_path):
    """Same seed, different thread counts, identical bundles."""
    bundles = []
    for threads in (1, 4):
        outcome, _ = _run("levyarea_bm", threads=threads)
        bundles.append(ReportGenerator(outcome).save_all(tmp_path / f"t{threads}"))

    first, second = bundles
    assert sorted(first) == sorted(second)
    for kind in first:
        assert Path(first[kind]).read_bytes() == Path(second[kind]).read_bytes()
