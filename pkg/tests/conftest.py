import re
import sys

import pytest

from raildelay.sim import default_config_text, parse_config, run_simulation


def scenario_text(duration=None, seed=None):
    """Bundled scenario text with an optional shorter run or other seed."""
    text = default_config_text()
    if duration is not None:
        text = re.sub(r"duration_s = \d+", f"duration_s = {duration}", text)
    if seed is not None:
        text = re.sub(r"(\[seed\]\s*\n(?:#.*\n)*value = )\d+", rf"\g<1>{seed}", text)
    return text


@pytest.fixture(scope="session")
def small_config():
    return parse_config(scenario_text(duration=1200))


@pytest.fixture(scope="session")
def small_run(small_config):
    return run_simulation(small_config)


@pytest.fixture(scope="session")
def default_run():
    return run_simulation(parse_config(scenario_text()))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
