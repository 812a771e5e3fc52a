import pytest

from dsmcmc.cli import load_config_file, main


def test_funnel_command_writes_csv_traces_and_figures(tmp_path, capsys):
    out = tmp_path / "funnel.csv"
    code = main([
        "funnel", "--p", "0,1", "--sampler", "ds", "--updates", "200",
        "--thin", "20", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header == "p,sampler,seed,updates,mean_v,se_v,ess_v,runtime_seconds"
    assert (tmp_path / "funnel_trace_ds_p0.csv").exists()
    assert (tmp_path / "funnel_trace_ds_p1.csv").exists()
    assert (tmp_path / "funnel.png").exists()
    assert (tmp_path / "funnel_trace_ds_p1.png").exists()
    listed = capsys.readouterr().out
    assert "wrote" in listed


def test_no_plot_skips_figures(tmp_path):
    out = tmp_path / "funnel.csv"
    code = main([
        "funnel", "--p", "1", "--sampler", "ds", "--updates", "100",
        "--thin", "10", "--out", str(out), "--no-plot",
    ])
    assert code == 0
    assert out.exists()
    assert not (tmp_path / "funnel.png").exists()


def test_stdout_csv_when_no_out(capsys):
    code = main(["ring", "--stream", "constant", "--constant", "0.2",
                 "--trials", "100", "--seed", "1"])
    assert code == 0
    captured = capsys.readouterr().out.splitlines()
    assert captured[0].startswith("stream,p,seed,trials,mean_steps")
    assert len(captured) == 2


def test_ar_command(tmp_path):
    out = tmp_path / "ar.csv"
    code = main(["ar", "--alpha", "0.5", "--pattern", "duplicate-pairs",
                 "--mode", "naive", "--updates", "20000", "--seed", "0",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "alpha,pattern,mode,seed,samples,mean,variance,runtime_seconds"
    assert len(lines) == 2
    assert (tmp_path / "ar.png").exists()


def test_interleave_command(capsys):
    code = main(["interleave", "--p", "1", "--r", "0.01", "--updates", "200",
                 "--thin", "20", "--seed", "2"])
    assert code == 0
    captured = capsys.readouterr().out.splitlines()
    assert captured[0].startswith("r,p,sampler,seed,updates,mean_v")


def test_config_file_supplies_defaults_cli_overrides(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text(
        "# experiment options\n"
        "p = 0,1\n"
        "sampler = ds\n"
        "updates = 100\n"
        "thin = 10\n"
        "seed = 9\n"
    )
    out = tmp_path / "out.csv"
    code = main(["funnel", "--config", str(conf), "--updates", "60",
                 "--out", str(out), "--no-plot"])
    assert code == 0
    rows = out.read_text().splitlines()[1:]
    # CLI --updates wins over the file's 100
    assert all(row.split(",")[3] == "60" for row in rows)
    assert all(row.split(",")[2] == "9" for row in rows)


def test_load_config_file_rejects_unknown_keys(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("mystery = 1\n")
    with pytest.raises(Exception):
        load_config_file(conf)


def test_bad_config_file_returns_exit_code_one(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("updates: 100\n")
    assert main(["funnel", "--config", str(conf)]) == 1


def test_invalid_value_returns_exit_code_one():
    assert main(["funnel", "--p", "1.7", "--updates", "50"]) == 1


def test_missing_stream_file_returns_exit_code_one(tmp_path):
    assert main(["funnel", "--stream", "file", "--stream-file",
                 str(tmp_path / "nope.txt"), "--updates", "50"]) == 1


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as err:
        main(["funnel", "--bogus"])
    assert err.value.code == 1


def test_exhausted_file_stream_returns_exit_code_two(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("0.5\n0.25\n")
    code = main(["funnel", "--stream", "file", "--stream-file", str(path),
                 "--on-exhaust", "error", "--updates", "100", "--sampler", "ds"])
    assert code == 2


def test_file_stream_cycle_mode_runs(tmp_path, capsys):
    path = tmp_path / "vals.txt"
    path.write_text("\n".join(f"0.{d}" for d in range(1, 10)))
    code = main(["funnel", "--stream", "file", "--stream-file", str(path),
                 "--updates", "100", "--thin", "10", "--sampler", "ds"])
    assert code == 0


def test_validate_battery(capsys):
    code = main(["validate", "--samples", "10000", "--seed", "0"])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out
