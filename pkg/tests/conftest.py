from hypothesis import settings

# The first call of every jitted kernel loads it from the numba cache.
settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE_RESULTS = []


def record_acceptance(name, ok, detail):
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    passed = sum(ok for _, ok, _ in ACCEPTANCE_RESULTS)
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE_RESULTS)} acceptance checks passed")
