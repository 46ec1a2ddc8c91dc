import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", parent=settings.get_profile("default"), max_examples=400)
settings.load_profile("default")

_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record a criterion verdict: ``acceptance(number, passed, detail)``."""

    def record(number, passed, detail):
        _ACCEPTANCE.setdefault(number, []).append((bool(passed), request.node.name, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[number]
        ok = all(p for p, _, _ in checks)
        detail = "; ".join(d for _, _, d in checks)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
