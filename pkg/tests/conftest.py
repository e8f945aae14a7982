import pytest

from abstract_intersection import _kernels

# criterion label -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session", autouse=True)
def jit_warmup():
    # compile once so timed tests measure steady state
    _kernels.warmup()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=_label_key):
        passed, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")


def _label_key(label):
    head = label.split()[0]
    return (int(head.rstrip(".").split("[")[0]), label)
