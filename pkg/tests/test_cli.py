"""CLI and report tests: manifest parsing, batch runs, aggregation, figures."""

import csv
import math
import statistics

import pandas as pd
import pytest

from odta import report
from odta.cli import (
    RunManifest,
    main,
    manifest_jobs,
    parse_counts,
    parse_kv,
    parse_manifest,
    thread_count,
)
from odta.model import FleetLayout, read_request_log
from odta.sim import DeadlineMode, Policy, ScenarioConfig, run_trial


# ---------------------------------------------------------------------------
# Manifest parsing.
# ---------------------------------------------------------------------------


def test_parse_kv_skips_comments_and_blanks():
    kv = parse_kv("# header\n\nn=40  # trailing\nseed = 7\n")
    assert kv == {"n": "40", "seed": "7"}


@pytest.mark.parametrize(
    "text,msg",
    [
        ("n 40", "expected key=value"),
        ("n=40\nn=80", "duplicate key"),
        ("n=", "empty value"),
    ],
)
def test_parse_kv_rejects_malformed_lines(text, msg):
    with pytest.raises(ValueError, match=msg):
        parse_kv(text)


def test_parse_counts_range_with_step():
    assert parse_counts("40..280 step 40") == (40, 80, 120, 160, 200, 240, 280)


def test_parse_counts_plain_forms():
    assert parse_counts("40..42") == (40, 41, 42)
    assert parse_counts("40, 80") == (40, 80)
    assert parse_counts("40") == (40,)


@pytest.mark.parametrize("text", ["40..280 step 0", "280..40", "forty", "0", "40,0"])
def test_parse_counts_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_counts(text)


def test_parse_manifest_full_grid():
    man = parse_manifest(
        "n=40..280 step 40\nfleet=equal,unequal\ndeadline=E,2E\n"
        "policy=HMRODTA,GreedyFCFS\nseed=5\ntrials=3\n"
    )
    assert man.counts == (40, 80, 120, 160, 200, 240, 280)
    assert man.fleets == (FleetLayout.EQUAL, FleetLayout.UNEQUAL)
    assert man.deadline_modes == (DeadlineMode.E, DeadlineMode.TWO_E)
    assert man.policies == (Policy.HMRODTA, Policy.GREEDY)
    assert man.seed == 5 and man.trials == 3


def test_parse_manifest_defaults_and_errors():
    man = parse_manifest("n=40\n")
    assert man.deadline_modes == (DeadlineMode.TWO_E,)
    assert man.fleets == (FleetLayout.EQUAL,)
    assert man.policies == (Policy.HMRODTA,)
    with pytest.raises(ValueError, match="needs an n="):
        parse_manifest("seed=1\n")
    with pytest.raises(ValueError, match="unknown manifest keys: speed"):
        parse_manifest("n=40\nspeed=9\n")


def test_manifest_jobs_order_and_seeds():
    man = RunManifest(counts=(10, 20), policies=(Policy.HMRODTA, Policy.GREEDY), seed=3, trials=2)
    jobs = manifest_jobs(man)
    assert len(jobs) == 8
    assert [(j.policy, j.cfg.n_requests, j.cfg.seed) for j in jobs[:4]] == [
        (Policy.HMRODTA, 10, 3),
        (Policy.HMRODTA, 10, 4),
        (Policy.HMRODTA, 20, 3),
        (Policy.HMRODTA, 20, 4),
    ]
    assert all(j.policy is Policy.GREEDY for j in jobs[4:])


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("ODTA_THREADS", "2")
    assert thread_count() == 2
    monkeypatch.setenv("ODTA_THREADS", "0")
    with pytest.raises(ValueError, match="positive"):
        thread_count()
    monkeypatch.setenv("ODTA_THREADS", "many")
    with pytest.raises(ValueError, match="integer"):
        thread_count()
    monkeypatch.delenv("ODTA_THREADS")
    assert thread_count() >= 1


# ---------------------------------------------------------------------------
# Aggregation math.
# ---------------------------------------------------------------------------


def test_symmetric_pct_diff_hand_values():
    assert report.symmetric_pct_diff(5.0, 10.0) == pytest.approx(66.6666666667)
    assert report.symmetric_pct_diff(10.0, 5.0) == pytest.approx(66.6666666667)
    assert report.symmetric_pct_diff(0.0, 0.0) == 0.0
    assert report.symmetric_pct_diff(3.0, 3.0) == 0.0


def _metrics_frame(rows):
    return pd.DataFrame(
        rows,
        columns=["seed", "policy", "fleet", "deadline_mode", "n_requests",
                 "cum_penalty_s", "rejected", "completed"],
    )


def test_policy_differences_banded_hand_case():
    rows = []
    for seed, rej, pen in [(0, 4, 5.0), (1, 6, 5.0)]:
        rows.append((seed, "HMRODTA", "EqualRobots", "2E", 40, pen, rej, 40 - rej))
    for seed, rej, pen in [(0, 9, 10.0), (1, 11, 10.0)]:
        rows.append((seed, "GreedyFCFS", "EqualRobots", "2E", 40, pen, rej, 40 - rej))
    for policy, rej in [("HMRODTA", 10), ("GreedyFCFS", 30)]:
        for seed in (0, 1):
            rows.append((seed, policy, "EqualRobots", "2E", 160, 0.0, rej, 160 - rej))
    diffs = report.policy_differences(report.summarize(_metrics_frame(rows)))
    assert list(diffs["band"]) == ["40-160", "160-280"]
    low = diffs[diffs["band"] == "40-160"].iloc[0]
    high = diffs[diffs["band"] == "160-280"].iloc[0]
    # n=40: means 5 vs 10 -> 66.67; n=160: 10 vs 30 -> 100; band averages them
    assert low["pct_diff_rejected"] == pytest.approx((200.0 / 3.0 + 100.0) / 2.0)
    assert low["pct_diff_penalty"] == pytest.approx((200.0 / 3.0 + 0.0) / 2.0)
    assert high["pct_diff_rejected"] == pytest.approx(100.0)
    assert high["pct_diff_penalty"] == 0.0


def test_policy_differences_single_policy_is_empty():
    rows = [(s, "HMRODTA", "EqualRobots", "2E", 40, 1.0, 0, 40) for s in range(3)]
    diffs = report.policy_differences(report.summarize(_metrics_frame(rows)))
    assert len(diffs) == 0
    assert list(diffs.columns) == list(report.PERCDIFF_COLUMNS)


def test_summarize_single_trial_std_is_zero():
    summary = report.summarize(_metrics_frame([(0, "HMRODTA", "EqualRobots", "2E", 40, 7.5, 2, 38)]))
    row = summary.iloc[0]
    assert row["trials"] == 1
    assert row["std_penalty_s"] == 0.0 and row["std_rejected"] == 0.0


# ---------------------------------------------------------------------------
# End-to-end subcommands.
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """One scenario, two trials, two policies: the smallest full run."""
    base = tmp_path_factory.mktemp("cli_run")
    manifest = base / "man.txt"
    manifest.write_text("n=8\ndeadline=2E\nfleet=equal\npolicy=HMRODTA,GreedyFCFS\ntrials=2\nseed=3\n")
    out = base / "res"
    assert main(["run", str(manifest), "--out", str(out)]) == 0
    return out


def test_run_writes_four_metrics_rows(run_dir):
    with open(run_dir / "metrics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(("seed", "policy", "fleet", "deadline_mode", "n_requests",
                            "cum_penalty_s", "rejected", "completed"))
    assert len(rows) == 1 + 4
    assert [r[:2] for r in rows[1:]] == [
        ["3", "HMRODTA"], ["4", "HMRODTA"], ["3", "GreedyFCFS"], ["4", "GreedyFCFS"],
    ]
    trace_files = sorted(p.name for p in (run_dir / "traces").iterdir())
    assert trace_files == [
        "trace_GreedyFCFS_EqualRobots_2E_n8_s3.csv",
        "trace_GreedyFCFS_EqualRobots_2E_n8_s4.csv",
        "trace_HMRODTA_EqualRobots_2E_n8_s3.csv",
        "trace_HMRODTA_EqualRobots_2E_n8_s4.csv",
    ]


def test_run_summary_matches_independent_recomputation(run_dir):
    per_cell: dict[tuple[str, str], list[float]] = {}
    with open(run_dir / "metrics.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["policy"], row["n_requests"])
            per_cell.setdefault(key, []).append(float(row["cum_penalty_s"]))
    summary = pd.read_csv(run_dir / "summary.csv")
    for (policy, n), penalties in per_cell.items():
        cell = summary[(summary["policy"] == policy) & (summary["n_requests"] == int(n))]
        assert len(cell) == 1
        assert cell.iloc[0]["mean_penalty_s"] == pytest.approx(statistics.fmean(penalties), rel=1e-12)
        expect_std = statistics.stdev(penalties) if len(penalties) > 1 else 0.0
        assert cell.iloc[0]["std_penalty_s"] == pytest.approx(expect_std, rel=1e-12, abs=1e-12)


def test_run_rerun_is_byte_identical(run_dir, tmp_path):
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=8\ndeadline=2E\nfleet=equal\npolicy=HMRODTA,GreedyFCFS\ntrials=2\nseed=3\n")
    out = tmp_path / "res2"
    assert main(["run", str(manifest), "--out", str(out)]) == 0
    assert (out / "metrics.csv").read_bytes() == (run_dir / "metrics.csv").read_bytes()
    assert (out / "summary.csv").read_bytes() == (run_dir / "summary.csv").read_bytes()
    for trace in sorted((out / "traces").iterdir()):
        assert trace.read_bytes() == (run_dir / "traces" / trace.name).read_bytes()


def test_run_single_thread_matches_default(run_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("ODTA_THREADS", "1")
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=8\ndeadline=2E\nfleet=equal\npolicy=HMRODTA,GreedyFCFS\ntrials=2\nseed=3\n")
    out = tmp_path / "res_serial"
    assert main(["run", str(manifest), "--out", str(out)]) == 0
    assert (out / "metrics.csv").read_bytes() == (run_dir / "metrics.csv").read_bytes()


def test_run_policy_and_trials_overrides(run_dir, tmp_path, capsys):
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=8\npolicy=HMRODTA,GreedyFCFS\ntrials=2\nseed=3\n")
    out = tmp_path / "res_hmr"
    assert main(["run", str(manifest), "--out", str(out), "--policy", "HMRODTA", "--trials", "1"]) == 0
    with open(out / "metrics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2 and rows[1][1] == "HMRODTA"
    with open(run_dir / "metrics.csv", newline="") as fh:
        assert rows[1] == list(csv.reader(fh))[1]


def test_run_missing_map_fails_without_partial_output(tmp_path, capsys):
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=8\nmap=%s\n" % (tmp_path / "nope.map"))
    out = tmp_path / "res"
    assert main(["run", str(manifest), "--out", str(out)]) == 2
    assert "map file not found" in capsys.readouterr().err
    assert not out.exists()


def test_run_rejects_bad_manifest(tmp_path, capsys):
    manifest = tmp_path / "man.txt"
    manifest.write_text("trials=2\n")
    assert main(["run", str(manifest), "--out", str(tmp_path / "r")]) == 2
    assert "needs an n=" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "r")]) == 2


def test_report_emits_tables_and_figures(run_dir, tmp_path):
    out = tmp_path / "rep"
    assert main(["report", str(run_dir), "--out", str(out)]) == 0
    assert (out / "summary.csv").is_file()
    text = (out / "percdiff.csv").read_text().splitlines()
    assert text[0] == report.PERCDIFF_NOTE
    assert text[1] == ",".join(report.PERCDIFF_COLUMNS)
    figures = sorted(p.name for p in out.glob("*.png"))
    assert figures == ["penalty_EqualRobots.png", "rejected_EqualRobots.png"]
    assert all((out / f).stat().st_size > 0 for f in figures)


def test_report_is_byte_reproducible(run_dir, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["report", str(run_dir), "--out", str(out_a)]) == 0
    assert main(["report", str(run_dir), "--out", str(out_b)]) == 0
    for name in ("summary.csv", "percdiff.csv", "rejected_EqualRobots.png", "penalty_EqualRobots.png"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_report_summary_matches_run_summary(run_dir, tmp_path):
    out = tmp_path / "rep"
    assert main(["report", str(run_dir), "--out", str(out)]) == 0
    assert (out / "summary.csv").read_bytes() == (run_dir / "summary.csv").read_bytes()


def test_report_missing_dir_fails(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == 2
    assert "metrics" in capsys.readouterr().err


def test_gen_reproducible_and_replayable(tmp_path):
    config = tmp_path / "gen.txt"
    config.write_text("n=6\nseed=11\n")
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gen", str(config), "--out", str(out_a)]) == 0
    assert main(["gen", str(config), "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    requests = read_request_log(str(out_a))
    assert len(requests) == 6
    assert [r.id for r in requests] == list(range(6))
    assert all(r.arrival_s <= r.deadline_s for r in requests)
    cfg = ScenarioConfig(n_requests=6, seed=11)
    replayed = run_trial(cfg, requests=requests)
    fresh = run_trial(cfg)
    assert replayed.cumulative_penalty_s == fresh.cumulative_penalty_s
    assert replayed.rejected_count == fresh.rejected_count
    assert replayed.per_request == fresh.per_request
    out_c = tmp_path / "c.csv"
    assert main(["gen", str(config), "--out", str(out_c), "--seed", "12"]) == 0
    assert out_a.read_bytes() != out_c.read_bytes()


def test_gen_rejects_zero_requests(tmp_path, capsys):
    config = tmp_path / "gen.txt"
    config.write_text("n=0\n")
    assert main(["gen", str(config), "--out", str(tmp_path / "r.csv")]) == 2
    assert "n_requests must be positive" in capsys.readouterr().err
    assert not (tmp_path / "r.csv").exists()


def test_gen_rejects_degenerate_map(tmp_path, capsys):
    one_loc = tmp_path / "one.map"
    one_loc.write_text("3 3 1\n...\n...\n...\nloc A 1 1\ndepot 0 0\n")
    config = tmp_path / "gen.txt"
    config.write_text("n=4\nmap=%s\n" % one_loc)
    assert main(["gen", str(config), "--out", str(tmp_path / "r.csv")]) == 2
    assert "two named locations" in capsys.readouterr().err


def test_run_unwritable_out_dir_fails_cleanly(tmp_path, capsys):
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=8\ntrials=1\n")
    blocker = tmp_path / "taken"
    blocker.write_text("")
    assert main(["run", str(manifest), "--out", str(blocker)]) == 2
    assert "cannot write output" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    import subprocess

    config = tmp_path / "gen.txt"
    config.write_text("n=3\nseed=2\n")
    out = tmp_path / "reqs.csv"
    proc = subprocess.run(
        ["odta", "gen", str(config), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.is_file()
