from pathlib import Path

import hypothesis
import pytest

from idvd_dock.model import load_scenario


hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
NOMINAL = ROOT / "scenarios" / "nominal.yaml"


@pytest.fixture(scope="session")
def nominal():
    return load_scenario(NOMINAL)


@pytest.fixture(scope="session")
def nominal_plan(nominal):
    from idvd_dock.planner import optimize
    return optimize(nominal)


# criterion -> list of (check, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(c[1] for c in checks)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({info})" for name, good, info in checks)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
