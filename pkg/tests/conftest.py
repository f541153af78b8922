import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r'test_acceptance\.py::test_criterion_(\d+)', report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    detail = dict(report.user_properties).get('detail', '')
    if report.when == 'call' or (report.when == 'setup' and report.failed):
        _ACCEPTANCE[n] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for n in sorted(_ACCEPTANCE):
        outcome, detail = _ACCEPTANCE[n]
        status = 'PASS' if outcome == 'passed' else 'FAIL'
        terminalreporter.write_line(f'criterion {n:2d}: {status}  {detail}')
