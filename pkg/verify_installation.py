"""
Installation Verification Script

Verifies that all components of the signature concentration lab
are properly installed and functional.

Usage:
    python verify_installation.py
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))


def print_header(text):
    """Print formatted header."""
    print("\n" + "=" * 70)
    print(f"  {text}")
    print("=" * 70)


def check_python_version():
    """Verify Python version."""
    print("\n✓ Checking Python version...")
    major, minor = sys.version_info[:2]
    print(f"  Python {major}.{minor}")

    if major < 3 or (major == 3 and minor < 9):
        print("  ❌ Python 3.9 or higher required")
        return False

    print("  ✅ Python version OK")
    return True


def check_dependencies():
    """Verify external dependencies."""
    print("\n✓ Checking external dependencies...")

    dependencies = [
        ("numpy", "Array kernels and Philox streams"),
        ("scipy", "Triangular solves, regressions, Toeplitz"),
        ("sympy", "Möbius function for Witt dimensions"),
        ("pytest", "Testing framework (optional)"),
        ("hypothesis", "Property-based tests (optional)"),
    ]

    all_ok = True

    for package, description in dependencies:
        try:
            __import__(package)
            print(f"  ✅ {package:15} - {description}")
        except ImportError:
            if package in ("pytest", "hypothesis"):
                print(f"  ⚠️  {package:15} - {description} - Optional, skipping")
            else:
                print(f"  ❌ {package:15} - {description} - Missing")
                all_ok = False

    return all_ok


def check_project_structure():
    """Verify project directory structure."""
    print("\n✓ Checking project structure...")

    required_dirs = [
        "src",
        "src/algebra",
        "src/signature",
        "src/simulation",
        "src/experiments",
        "src/parser",
        "src/configs",
        "src/configs/config_definitions",
        "src/configs/config_definitions/presets",
        "src/validator",
        "src/reporting",
        "src/harness",
        "samples",
        "samples/configs",
        "tests",
        "docs",
        "config",
    ]

    all_ok = True

    for dir_path in required_dirs:
        if Path(dir_path).is_dir():
            print(f"  ✅ {dir_path}")
        else:
            print(f"  ❌ {dir_path} - Missing")
            all_ok = False

    return all_ok


def check_modules_import():
    """Verify all custom modules can be imported."""
    print("\n✓ Checking custom module imports...")

    modules = [
        ("src.algebra.tensor_algebra", "Tensor Algebra"),
        ("src.algebra.lie_algebra", "Lie Algebra"),
        ("src.signature.signature_engine", "Signature Engine"),
        ("src.simulation.gaussian_simulator", "Gaussian Simulator"),
        ("src.experiments.concentration_lab", "Concentration Lab"),
        ("src.parser.path_parser", "Path Parser"),
        ("src.configs.config_loader", "Config Loader"),
        ("src.validator.validation_engine", "Validation Engine"),
        ("src.reporting.report_generator", "Report Generator"),
        ("src.harness.cli", "Command Line"),
        ("config.settings", "Configuration"),
    ]

    all_ok = True

    for module_name, description in modules:
        try:
            __import__(module_name)
            print(f"  ✅ {module_name:35} - {description}")
        except Exception as e:
            print(f"  ❌ {module_name:35} - {description} - {e}")
            all_ok = False

    return all_ok


def check_sample_signature():
    """Verify the sample path parses and has the expected signature."""
    print("\n✓ Checking sample signature...")

    try:
        from src.parser.path_parser import PathParser
        from src.signature.signature_engine import path_signature

        paths = PathParser().parse_file("samples/axis_path.csv")
        signature = path_signature(paths[0], 2)
        s12, s21 = signature.coefficient((1, 2)), signature.coefficient((2, 1))

        if abs(s12 - 1.0) < 1e-12 and abs(s21) < 1e-12:
            print(f"  ✅ samples/axis_path.csv - S(1,2) = {s12:g}, S(2,1) = {s21:g}")
            return True
        print(f"  ❌ samples/axis_path.csv - unexpected S(1,2) = {s12!r}, S(2,1) = {s21!r}")
        return False

    except Exception as e:
        print(f"  ❌ Signature check failed: {e}")
        return False


def check_config_validation():
    """Verify sample configs load and an invalid one is rejected."""
    print("\n✓ Checking config validation...")

    try:
        from src.configs.config_loader import ConfigLoader
        from src.exceptions import ConfigError

        config = ConfigLoader().load_validated("samples/configs/variance_bm.json")
        print(f"  ✅ variance_bm.json valid ({config['experiment']}, {config['model']['kind']})")

        try:
            ConfigLoader().load_validated("samples/configs/bad_theta.json")
        except ConfigError as e:
            print(f"  ✅ bad_theta.json rejected: {e}")
            return True
        print("  ❌ bad_theta.json was accepted")
        return False

    except Exception as e:
        print(f"  ❌ Config validation failed: {e}")
        import traceback
        traceback.print_exc()
        return False


def check_reporting():
    """Verify a small run produces its report."""
    print("\n✓ Checking report generation...")

    try:
        from src.configs.config_loader import ConfigLoader
        from src.harness.runner import run
        from src.reporting.report_generator import ReportGenerator

        config = ConfigLoader().load_validated("samples/configs/sig_axis.json")
        generator = ReportGenerator(run(config))

        reports = {
            "JSON": generator.generate_json_report(),
            "Dashboard": generator.generate_dashboard(),
        }

        all_ok = True
        for format_name, report in reports.items():
            if report:
                print(f"  ✅ {format_name} report generated ({len(report)} chars)")
            else:
                print(f"  ❌ {format_name} report failed")
                all_ok = False
        return all_ok

    except Exception as e:
        print(f"  ❌ Report generation failed: {e}")
        import traceback
        traceback.print_exc()
        return False


def main():
    """Run all verification checks."""
    print("\n" + "╔" + "═" * 68 + "╗")
    print("║" + " " * 18 + "INSTALLATION VERIFICATION" + " " * 25 + "║")
    print("╚" + "═" * 68 + "╝")

    print("\n  Verifying signature concentration lab installation...")

    checks = [
        ("Python Version", check_python_version),
        ("External Dependencies", check_dependencies),
        ("Project Structure", check_project_structure),
        ("Module Imports", check_modules_import),
        ("Sample Signature", check_sample_signature),
        ("Config Validation", check_config_validation),
        ("Report Generation", check_reporting),
    ]

    results = {}

    for check_name, check_func in checks:
        try:
            results[check_name] = check_func()
        except Exception as e:
            print(f"\n❌ {check_name} check crashed: {e}")
            results[check_name] = False

    # Summary
    print_header("VERIFICATION SUMMARY")

    passed = sum(1 for v in results.values() if v)
    total = len(results)

    print()
    for check_name, result in results.items():
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"  {status}  {check_name}")

    print(f"\n  Overall: {passed}/{total} checks passed")

    if passed == total:
        print("\n  🎉 All checks passed! Installation is complete.")
        print("\n  Next steps:")
        print("    1. Run tests: pytest")
        print("    2. Try a run: python sigconc.py variance --config samples/configs/variance_bm.json")
        print()
        return True
    else:
        print("\n  ⚠️  Some checks failed. Please review errors above.")
        print("\n  Common fixes:")
        print("    1. Install dependencies: pip install -r requirements.txt")
        print("    2. Run from the project root")
        print()
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
