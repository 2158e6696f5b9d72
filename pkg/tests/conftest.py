import os

import pytest

# acceptance verdicts, filled by tests/test_acceptance.py
VERDICTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: numbered acceptance criterion")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("FHNSYNC_LONG") == "1":
        return
    skip = pytest.mark.skip(reason="long run; set FHNSYNC_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(VERDICTS):
        status, name, detail = VERDICTS[num]
        terminalreporter.write_line(f"criterion {num:2d} {status}: {name} | {detail}")
