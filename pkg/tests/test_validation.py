import numpy as np

from frislab.validation import ALL_CHECKS, run_validation


def test_all_checks_pass_and_names_are_stable():
    results = run_validation()
    assert len(results) == len(ALL_CHECKS)
    failed = [r.name for r in results if not r.passed]
    assert not failed, f"failing checks: {failed}"
    assert [r.name for r in results] == [name for name, _ in ALL_CHECKS]


def test_filter_selects_subset():
    results = run_validation(name_filter="beamformer")
    assert {r.name for r in results} == {"beamformer.grid", "beamformer.random"}


def test_deterministic_details():
    a = run_validation(name_filter="quartic", seed=4)
    b = run_validation(name_filter="quartic", seed=4)
    assert [(r.name, r.passed, r.detail) for r in a] == [
        (r.name, r.passed, r.detail) for r in b
    ]
