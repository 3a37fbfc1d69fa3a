import csv
import json

import pytest

from dlgeo.cli import build_parser, main, read_config, _merge_config, _policy_from_args


def run_cli(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def test_density_scaled_json(tmp_path):
    out = tmp_path / "d.json"
    code = run_cli(["density", "--scaled", "-L", "16", "-s", "0.5",
                    "--ell", "0", "--x", "0", "--format", "json",
                    "--output", str(out)])
    assert code == 0
    rec = json.loads(out.read_text())
    assert rec["sign"] == 1
    assert rec["log_mag"] == pytest.approx(-91.77, abs=0.1)
    assert rec["terms"][0]["k1"] == 1
    assert "truncation_log_mag" in rec


def test_density_invalid_s_exits_2(capsys):
    code = run_cli(["density", "--scaled", "-L", "16", "-s", "1.5"])
    assert code == 2
    assert "precondition" in capsys.readouterr().err


def test_density_missing_args_exit_2():
    assert run_cli(["density", "--scaled"]) == 2
    assert run_cli(["density"]) == 2


def test_k_max_flag_reaches_policy():
    parser = build_parser()
    args = parser.parse_args(["density", "--scaled", "-L", "9", "--k-max", "3"])
    assert _policy_from_args(args).k_max == 3
    args = parser.parse_args(["density", "--scaled", "-L", "9"])
    assert _policy_from_args(args).k_max == 2


def test_tw_table_csv(tmp_path):
    out = tmp_path / "tw.csv"
    code = run_cli(["tw", "--grid=-2:2:5", "--output", str(out)])
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["L", "F", "f", "method"]
    assert len(rows) == 6
    Fs = [float(r[1]) for r in rows[1:]]
    assert all(b > a for a, b in zip(Fs, Fs[1:]))
    assert {r[3] for r in rows[1:]} == {"painleve"}


def test_tw_requires_values():
    assert run_cli(["tw"]) == 2


def test_conditional_csv(tmp_path):
    out = tmp_path / "c.csv"
    code = run_cli(["conditional", "-L", "9", "-s", "0.5", "--output", str(out)])
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["L", "s", "ell", "x", "value", "gaussian", "ratio"]
    assert float(rows[1][6]) == pytest.approx(0.9712, abs=5e-3)


def test_converge_thread_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    argv = ["converge", "--L-list", "9,16", "--grid", "0,0", "-s", "0.5"]
    assert run_cli(argv + ["--threads", "1", "--output", str(a)]) == 0
    assert run_cli(argv + ["--threads", "2", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_requires_seed(capsys):
    assert run_cli(["verify", "--budget", "1e6"]) == 2
    assert "seed" in capsys.readouterr().err


def test_verify_runs_and_reports(tmp_path):
    out = tmp_path / "v.json"
    code = run_cli(["verify", "--budget", "1e7", "--seed", "5",
                    "--output", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 4
    recs = [json.loads(ln) for ln in lines]
    assert all(r["passed"] for r in recs)


def test_contours_export(tmp_path):
    out = tmp_path / "g.csv"
    code = run_cli(["contours", "--ell1", "4.5", "--ell2", "4.5",
                    "--output", str(out)])
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["contour_id", "segment_id", "node_re", "node_im",
                       "weight_re", "weight_im"]
    assert len(rows) > 100


def test_config_file_and_flag_priority(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study defaults\nz-radius = 0.7\nthreads = 3\n")
    parsed = read_config(cfg)
    assert parsed == {"z_radius": "0.7", "threads": "3"}
    parser = build_parser()
    argv = ["density", "--scaled", "-L", "9", "--config", str(cfg)]
    args = parser.parse_args(argv)
    _merge_config(args, argv)
    assert args.z_radius == 0.7 and args.threads == 3
    # explicit flag wins over the config value
    argv = ["density", "--scaled", "-L", "9", "--config", str(cfg),
            "--z-radius", "0.3"]
    args = parser.parse_args(argv)
    _merge_config(args, argv)
    assert args.z_radius == 0.3


def test_config_bad_line_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    code = run_cli(["density", "--scaled", "-L", "9", "--config", str(cfg)])
    assert code == 2
