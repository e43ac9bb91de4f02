import pytest

# lines recorded by the acceptance tests, printed again at the end of the run
ACCEPTANCE = []


@pytest.fixture
def record():
    def _record(n, title, ok, detail=""):
        line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
