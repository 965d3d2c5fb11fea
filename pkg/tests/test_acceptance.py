"""Acceptance gate: every criterion at its pinned tolerance, one line each."""

import pytest

from nvramsey import acceptance
from nvramsey import config as cfgmod


@pytest.fixture(scope="module")
def cfg():
    return cfgmod.load_config()


@pytest.mark.parametrize("name,criterion", acceptance.CRITERIA, ids=[n for n, _ in acceptance.CRITERIA])
def test_criterion(name, criterion, cfg, capsys):
    metrics = criterion(cfg)
    with capsys.disabled():
        print()
        for m in metrics:
            print("  " + m.line())
    failed = [m.name for m in metrics if not m.passed]
    assert not failed, f"criterion {name} failed metrics: {failed}"


def test_full_report_passes(cfg):
    # cheap re-aggregation consistency: structure of the report itself
    report = acceptance.RunReport(
        scenario="reference",
        input_hash=cfgmod.config_hash(cfg),
        metrics=tuple(acceptance.criterion_rms_snr(cfg)),
        wall_time=0.0,
    )
    assert report.all_passed
    assert len(report.lines()) == len(report.metrics) + 2
    names = [m.name for m in report.metrics]
    assert len(names) == len(set(names))
