import pytest

from edpsim import SelectionEnv, load_config, load_fixtures


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def fixtures(config):
    return load_fixtures(config.cpu, config.disk)


@pytest.fixture(scope="session")
def qed_env(config, fixtures):
    qf = fixtures.qed_lineitem
    return SelectionEnv(
        table=qf.table, cpu=config.cpu, disk=config.disk, costs=qf.costs
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    marker = "test_acceptance.py::test_criterion_"
    results: dict[int, tuple[str, str]] = {}
    for outcome, status in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if marker not in nodeid:
                continue
            name = nodeid.split("::", 1)[1]
            parts = name[len("test_criterion_") :].split("_")
            number = int(parts[0])
            desc = " ".join(parts[1:])
            if results.get(number, ("", "PASS"))[1] == "PASS":
                results[number] = (desc, status)
            elif status == "FAIL":
                results[number] = (desc, status)
    if not results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for number in sorted(results):
        desc, status = results[number]
        terminalreporter.write_line(f"  criterion {number:2d} ({desc}): {status}")
