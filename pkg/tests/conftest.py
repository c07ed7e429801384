import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tmcc_qkd.alphabet import EmptyLetterWarning  # noqa: E402


@pytest.fixture(autouse=True)
def _quiet_empty_letters():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyLetterWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
