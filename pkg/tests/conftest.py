import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_runtest_logreport(report):
    # acceptance tests print their own PASS lines; mirror failures the same way
    if report.when == "call" and report.failed and "test_acceptance" in report.nodeid:
        print(f"\nFAIL {report.nodeid.split('::')[-1]}", flush=True)
