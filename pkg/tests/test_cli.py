import json
import os
import subprocess
import sys

import pytest

from hpcai500.cli import main
from hpcai500.ingest import PROFILE_HEADER, write_runs
from helpers import make_run


def run_cli(*argv, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "hpcai500", *argv],
        capture_output=True, text=True, env=env,
    )


def run_main(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def valid_runs(tmp_path):
    path = tmp_path / "good.runs.jsonl"
    path.write_text(
        write_runs(
            [
                make_run(run_id="ic-1"),
                make_run(
                    run_id="ewa-1", benchmark_id="ewa", epochs_run=50,
                    sustained_flops=109e12, achieved_quality=0.35,
                    system_name="SysB",
                ),
            ]
        ),
        encoding="utf-8",
    )
    return path


@pytest.fixture
def profiles(tmp_path):
    rows = [PROFILE_HEADER]
    for i in range(8):
        rows.append(
            f"w{i:02d},{0.1 + 0.1 * (i % 5)},0.5,0.4,0.3,{i % 10},"
            f"{(i + 1) * 1000000},{10 + i},{(i + 1) * 1e9}"
        )
    rows.append("incomplete,0.5,0.5,0.5,0.5,5,,,")
    path = tmp_path / "profiles.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_validate_all_valid(capsys, valid_runs):
    code, out, err = run_main(capsys, "validate", str(valid_runs))
    assert code == 0
    assert out == ""


def test_validate_invalid_run(capsys, tmp_path):
    path = tmp_path / "bad.runs.jsonl"
    path.write_text(write_runs([make_run(run_id="r1", epochs_run=50)]))
    code, out, err = run_main(capsys, "validate", str(path))
    assert code == 1
    assert out == "r1: epochs_run 50 != required 90\n"


def test_validate_malformed_file(capsys, tmp_path):
    path = tmp_path / "broken.runs.jsonl"
    path.write_text('{"run_id": \n')
    code, out, err = run_main(capsys, "validate", str(path))
    assert code == 2
    assert "line 1" in err


def test_validate_missing_file(capsys, tmp_path):
    code, out, err = run_main(capsys, "validate", str(tmp_path / "nope"))
    assert code == 2


def test_score_reports(capsys, valid_runs):
    code, out, err = run_main(capsys, "score", str(valid_runs))
    assert code == 0
    reports = json.loads(out)
    assert [r["run_id"] for r in reports] == ["ic-1", "ewa-1"]
    assert reports[0]["vflops"] == 939e12
    assert reports[0]["valid"] is True
    assert reports[1]["penalty_coefficient"] == 1.0


def test_score_empty_file(capsys, tmp_path):
    path = tmp_path / "empty.runs.jsonl"
    path.write_text(write_runs([]))
    code, out, err = run_main(capsys, "score", str(path))
    assert code == 0
    assert json.loads(out) == []


def test_score_unknown_benchmark(capsys, tmp_path):
    path = tmp_path / "unknown.runs.jsonl"
    path.write_text(write_runs([make_run(benchmark_id="speech2text")]))
    code, out, err = run_main(capsys, "score", str(path))
    assert code == 1
    assert "speech2text" in err


def test_score_registry_override(capsys, tmp_path):
    path = tmp_path / "custom.runs.jsonl"
    path.write_text(
        write_runs(
            [make_run(benchmark_id="mybench", epochs_run=7,
                      achieved_quality=0.5)]
        )
    )
    registry = tmp_path / "registry.json"
    registry.write_text(
        json.dumps(
            [
                {
                    "id": "mybench",
                    "quality_metric": "top1_accuracy",
                    "target_quality": 0.5,
                    "required_epochs": 7,
                    "penalty_exponent": 3,
                }
            ]
        )
    )
    code, out, err = run_main(
        capsys, "score", str(path), "--registry", str(registry)
    )
    assert code == 0
    (report,) = json.loads(out)
    assert report["valid"] is True
    assert report["penalty_coefficient"] == 1.0


def test_rank_markdown_and_determinism(capsys, tmp_path):
    path = tmp_path / "rank.runs.jsonl"
    path.write_text(
        write_runs(
            [
                make_run(run_id="a", system_name="Alpha",
                         sustained_flops=30.0e15, achieved_quality=0.763),
                make_run(run_id="b", system_name="Beta",
                         sustained_flops=31.41e15, achieved_quality=0.763),
            ]
        )
    )
    code, out, err = run_main(capsys, "rank", str(path))
    assert code == 0
    first_row = out.splitlines()[2]
    assert first_row.startswith("| 1 | Beta | 31.41 PFLOPS")
    code2, out2, _ = run_main(capsys, "rank", str(path))
    assert (code2, out2) == (0, out)


def test_rank_include_invalid(capsys, tmp_path):
    path = tmp_path / "mixedvalid.runs.jsonl"
    path.write_text(
        write_runs(
            [
                make_run(run_id="ok"),
                make_run(run_id="short", epochs_run=50,
                         sustained_flops=999e12),
            ]
        )
    )
    code, out, _ = run_main(capsys, "rank", str(path), "--format", "csv")
    assert len(out.splitlines()) == 2  # header + valid run only
    code, out, _ = run_main(
        capsys, "rank", str(path), "--format", "csv", "--include-invalid"
    )
    assert len(out.splitlines()) == 3


def test_rank_mixed_benchmarks_fails(capsys, valid_runs):
    code, out, err = run_main(capsys, "rank", str(valid_runs))
    assert code == 1
    assert "mixes benchmark ids" in err


def test_rank_output_file(capsys, tmp_path):
    path = tmp_path / "one.runs.jsonl"
    path.write_text(write_runs([make_run(run_id="a")]))
    out_path = tmp_path / "ranking.json"
    code, out, err = run_main(
        capsys, "rank", str(path), "--format", "json",
        "--output", str(out_path),
    )
    assert code == 0
    assert out == ""
    assert json.loads(out_path.read_text())[0]["rank"] == 1


def test_variation_grouping_and_threshold(capsys, tmp_path):
    runs = [
        make_run(run_id=f"r{i}", epochs_run=e, achieved_quality=0.77)
        for i, e in enumerate([88, 90, 92])
    ] + [make_run(run_id="solo", system_name="Lonely")]
    path = tmp_path / "rep.runs.jsonl"
    path.write_text(write_runs(runs))
    code, out, err = run_main(capsys, "variation", str(path))
    assert code == 0
    assert "skipped" in err  # the single-run group warns
    (group,) = json.loads(out)
    assert group["runs"] == 3
    assert group["mean_epochs"] == 90.0
    assert group["classification"] == "unrepeatable"
    code, out, err = run_main(
        capsys, "variation", str(path), "--threshold", "0.05"
    )
    assert json.loads(out)[0]["classification"] == "repeatable"


def test_variation_custom_group_by(capsys, tmp_path):
    runs = [
        make_run(run_id="a", system_name="X", epochs_run=90),
        make_run(run_id="b", system_name="Y", epochs_run=92),
    ]
    path = tmp_path / "g.runs.jsonl"
    path.write_text(write_runs(runs))
    code, out, err = run_main(
        capsys, "variation", str(path), "--group-by", "benchmark_id"
    )
    (group,) = json.loads(out)
    assert group["runs"] == 2


def test_cluster_outputs_and_rerun_identical(tmp_path, profiles):
    out_dir = tmp_path / "out"
    result = run_cli(
        "cluster", str(profiles), "--mode", "arch_independent",
        "--seed", "42", "--output-dir", str(out_dir),
    )
    assert result.returncode == 0, result.stderr
    embedding = (out_dir / "embedding.csv").read_bytes()
    clusters = (out_dir / "clusters.json").read_bytes()
    assert b"workload_id,x,y,cluster" in embedding
    meta = json.loads(clusters)
    assert meta["dropped_workloads"] == ["incomplete"]
    assert meta["standardized"] is True
    assert meta["embedding"]["kl_log_base"] == "e"
    assert "dropped" in result.stderr and "incomplete" in result.stderr
    again = run_cli(
        "cluster", str(profiles), "--mode", "arch_independent",
        "--seed", "42", "--output-dir", str(out_dir),
    )
    assert again.returncode == 0
    assert (out_dir / "embedding.csv").read_bytes() == embedding
    assert (out_dir / "clusters.json").read_bytes() == clusters


def test_cluster_infeasible_perplexity(tmp_path, profiles):
    result = run_cli(
        "cluster", str(profiles), "--perplexity", "50",
        "--output-dir", str(tmp_path / "o"),
    )
    assert result.returncode == 1
    assert "infeasible" in result.stderr


def test_cluster_output_dir_env_var(tmp_path, profiles):
    out_dir = tmp_path / "envout"
    result = run_cli(
        "cluster", str(profiles), "--seed", "7",
        env_extra={"HPCAI500_OUTPUT_DIR": str(out_dir)},
    )
    assert result.returncode == 0, result.stderr
    assert (out_dir / "clusters.json").exists()


def test_scaling_measured(capsys, tmp_path):
    runs = [
        make_run(run_id="p8", accelerator_count=8, sustained_flops=100e12),
        make_run(run_id="p16", accelerator_count=16, sustained_flops=182e12),
    ]
    path = tmp_path / "scale.runs.jsonl"
    path.write_text(write_runs(runs))
    out_dir = tmp_path / "sc"
    code, out, err = run_main(
        capsys, "scaling", "--runs", str(path), "--output-dir", str(out_dir)
    )
    assert code == 0
    lines = (out_dir / "scaling.csv").read_text().splitlines()
    assert lines[0] == "scale,flops,speedup,efficiency"
    assert lines[1].startswith("8,")
    assert lines[2].split(",")[3] == "0.91"


def test_scaling_missing_baseline(capsys, tmp_path):
    path = tmp_path / "nobase.runs.jsonl"
    path.write_text(
        write_runs([make_run(run_id="p16", accelerator_count=16)])
    )
    code, out, err = run_main(capsys, "scaling", "--runs", str(path))
    assert code == 1
    assert "baseline" in err


def test_scaling_predicted(capsys, tmp_path):
    model = tmp_path / "model.json"
    model.write_text(
        json.dumps(
            {
                "model_bytes": 100e6,
                "per_device_compute_seconds": 0.1,
                "intra_node_bandwidth": 300e9,
                "inter_node_bandwidth": 1.25e9,
                "devices_per_node": 8,
            }
        )
    )
    out_dir = tmp_path / "pred"
    code, out, err = run_main(
        capsys, "scaling", "--model", str(model),
        "--scales", "1,8,64", "--output-dir", str(out_dir),
    )
    assert code == 0
    lines = (out_dir / "prediction.csv").read_text().splitlines()
    assert lines[0] == "scale,comm_bytes_per_device,comm_seconds,efficiency"
    assert lines[1].split(",") == ["1", "0.0", "0.0", "1.0"]
    eff_64 = float(lines[3].split(",")[3])
    assert 0.0 < eff_64 < 1.0


def test_scaling_bad_model_file(capsys, tmp_path):
    model = tmp_path / "model.json"
    model.write_text("{not json")
    code, out, err = run_main(capsys, "scaling", "--model", str(model))
    assert code == 2


def test_version_subprocess():
    result = run_cli("--version")
    assert result.returncode == 0
    assert "hpcai500 0.1.0" in result.stdout
    assert "format_version 1" in result.stdout


def test_exit_codes_subprocess(tmp_path):
    path = tmp_path / "bad.runs.jsonl"
    path.write_text(write_runs([make_run(run_id="r1", epochs_run=50)]))
    assert run_cli("validate", str(path)).returncode == 1
    ok = tmp_path / "ok.runs.jsonl"
    ok.write_text(write_runs([make_run()]))
    assert run_cli("validate", str(ok)).returncode == 0
    broken = tmp_path / "broken.runs.jsonl"
    broken.write_text("garbage\n")
    assert run_cli("validate", str(broken)).returncode == 2
