import pytest

from anisofield import config, errors, experiments


def test_checks():
    inside = experiments._within("kink", 1.02, (0.85, 1.15))
    above = experiments._at_most("slope", 0.2, 0.07)

    assert inside.passed
    assert inside.limit == [0.85, 1.15]
    assert not above.passed
    assert not experiments.Outcome(measured={}, checks=[inside, above]).passed
    assert experiments.Outcome(measured={}, checks=[]).passed


def test_error_report():
    exc = errors.TruncationDominates("tail too large", lag=[1, 0])
    resolved = config.resolve(preset="both-gt-incongruous", experiment="limit-check")

    report = experiments.error_report(exc, resolved, written=["limit.csv"])

    assert report["status"] == "error"
    assert report["experiment"] == "limit-check"
    assert report["exit_status"] == 3
    assert report["error"]["details"] == {"lag": [1, 0]}
    assert report["provenance"]["M"]["oracle"] == resolved["oracle"]["M"]
    assert report["provenance"]["preset"] == "both-gt-incongruous"
    assert report["artifacts"] == ["limit.csv"]


def test_run_exponents(tmp_path):
    resolved = config.resolve(
        preset="equal-large-q", overrides={"output": str(tmp_path)}, experiment="exponents"
    )

    outcome = experiments.run(resolved)

    assert outcome.passed
    assert [check.name for check in outcome.checks] == [
        "q_tilde_identity",
        "H_tilde_identity",
        "H_identity",
        "H_continuity",
    ]
    assert (tmp_path / "theory.csv").exists()
    assert (tmp_path / "report.json").exists()


def test_run_reraises_and_reports(tmp_path):
    resolved = config.resolve(
        overrides={"output": str(tmp_path), "model": {"q1": 3.0, "q2": 3.0}},
    )

    with pytest.raises(errors.OutOfRegion):
        experiments.run(resolved)

    assert (tmp_path / "report.json").exists()


def test_runners_cover_experiments():
    assert set(experiments.RUNNERS) == set(config.EXPERIMENTS)
