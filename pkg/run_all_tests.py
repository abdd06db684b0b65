"""Master verification runner - run every suite over the default corpus"""
import sys
import os
import time

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from toposforge.core.config import settings
from toposforge.core.logging_setup import configure_logging
from toposforge.services.verify import SUITES, SuiteConfig, run_suite


def main():
    configure_logging(settings.LOG_LEVEL)
    config = SuiteConfig()

    print("\n" + "="*70)
    print("TOPOSFORGE VERIFICATION SUITES")
    print("="*70)
    print(f"\nSeed {config.seed}, {config.count} spaces of at most {config.max_points} points, "
          f"formula depth {config.max_depth}")
    print("\nThis run will check:")
    for name in SUITES:
        print(f"  • {name}")
    print("\nStarting suites...\n")

    start_time = time.time()
    reports = []
    total = len(SUITES)

    for i, name in enumerate(SUITES, 1):
        print(f"\n[{i}/{total}] Running {name}...")
        suite_start = time.time()
        report = run_suite(name, config)
        reports.append((report, time.time() - suite_start))
        status = "✅" if report.ok else "❌"
        print(f"  {status} {len(report.checks)} checks, {len(report.failures)} failed")
        for failure in report.failures[:5]:
            print(f"     FAIL {failure.name} @ {failure.location} :: {failure.counterexample}")

    elapsed_time = time.time() - start_time

    print("\n\n" + "="*70)
    print("VERIFICATION SUMMARY REPORT")
    print("="*70)
    print(f"\nTotal execution time: {elapsed_time:.2f} seconds\n")
    print(f"  {'Suite':<22} {'Checks':<10} {'Failed':<10} {'XFAIL':<10} {'Time (s)':<10}")
    print(f"  {'-'*62}")
    for report, seconds in reports:
        xfail = sum(1 for c in report.checks if c.status == "XFAIL")
        print(f"  {report.suite:<22} {len(report.checks):<10} {len(report.failures):<10} {xfail:<10} {seconds:<10.2f}")

    failed = [report.suite for report, _ in reports if not report.ok]
    print("\n" + "="*70)
    if failed:
        print(f"❌ {len(failed)} suite(s) failed: {', '.join(failed)}")
    else:
        print("✅ All suites passed")
    print("="*70 + "\n")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
