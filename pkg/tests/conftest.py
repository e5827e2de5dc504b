import pytest

ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_addoption(parser):
    parser.addoption("--run-large", action="store_true", default=False, help="run the large-dataset smoke tests")


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-large"):
        return
    reason = "large-dataset smoke test; pass --run-large to enable"
    for item in items:
        if "large" in item.keywords:
            item.add_marker(pytest.mark.skip(reason=reason))
            key = item.name.split("_")[1].upper()  # test_ac10_... -> AC10
            config.stash[ACCEPTANCE_KEY][key] = (None, "optional", reason)


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion.

    Usage: ``criterion("AC5", "Iris accuracy", ok, "mean=0.97")``; the line
    is printed in the terminal summary and the test fails when ``ok`` is false.
    """
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(key, title, ok, detail=""):
        lines[key] = (bool(ok), title, detail)
        assert ok, f"{key} {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=lambda k: (len(k), k)):
        ok, title, detail = lines[key]
        tag = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{tag}  {key:5} {title}  {detail}")
