import json
import subprocess
import sys

import numpy as np

from ftcluster.cli import main, read_sweep_csv
from ftcluster.fitting import synthetic_records


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "ftcluster.cli", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def test_verify_passes():
    code, out, _err = run_cli("verify", "--max-chain", "2", "--lattice", "rhg")
    assert code == 0
    assert "all checks pass" in out


def test_verify_injected_failure_exits_nonzero():
    code, out, _err = run_cli("verify", "--max-chain", "0", "--lattice", "rhg",
                              "--inject-bad-check")
    assert code == 1
    assert "FAIL" in out


def test_graph_export_runs(tmp_path):
    out = tmp_path / "graph.txt"
    code = main(["graph", "--lattice", "rhg", "--model", "circuit-z",
                 "--eta", "100", "--d", "3", "--p", "0.01", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("decoding-graph lattice rhg")
    assert "components 1" in text


def test_graph_zero_rate_is_validation_error(capsys):
    code = main(["graph", "--lattice", "rhg", "--model", "circuit-z",
                 "--eta", "100", "--d", "3", "--p", "0"])
    assert code == 1


def test_graph_xzzx_infinite_bias_has_plane_components(tmp_path):
    out = tmp_path / "graph.txt"
    code = main(["graph", "--lattice", "xzzx", "--model", "circuit-z",
                 "--eta", "inf", "--d", "6", "--p", "0.01", "--out", str(out)])
    assert code == 0
    line = [ln for ln in out.read_text().splitlines()
            if ln.startswith("sector primal")][0]
    assert int(line.split()[-1]) >= 2  # one component per layer, Lu = 2


def test_sweep_writes_schema_and_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--lattice", "rhg", "--model", "circuit-z",
                 "--eta", "100", "--d-list", "3", "--p-list", "0.01 0.02 0.03",
                 "--trials", "50", "--seed", "4", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# ftcluster-sweep-v1"
    assert lines[1].startswith("lattice,model,eta,d_z,")
    assert len(lines) == 2 + 3
    recs = read_sweep_csv(out)
    assert [r.p_cz for r in recs] == [0.01, 0.02, 0.03]


def test_sweep_byte_identical_across_worker_counts(tmp_path):
    args = ["sweep", "--lattice", "rhg", "--model", "circuit-z", "--eta", "100",
            "--d-list", "3", "--p-list", "0.015 0.02", "--trials", "80",
            "--seed", "21"]
    f1, f2 = tmp_path / "w1.csv", tmp_path / "w4.csv"
    assert main(args + ["--workers", "1", "--out", str(f1)]) == 0
    assert main(args + ["--workers", "4", "--out", str(f2)]) == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_sweep_resume_computes_only_missing_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    base = ["sweep", "--lattice", "rhg", "--model", "circuit-z", "--eta", "100",
            "--trials", "40", "--seed", "9", "--out", str(out), "--d-list", "3"]
    assert main(base + ["--p-list", "0.01 0.02"]) == 0
    first = out.read_bytes()
    # resumed run with a superset grid appends only the new point
    assert main(base + ["--p-list", "0.01 0.02 0.03", "--resume"]) == 0
    content = out.read_bytes()
    assert content.startswith(first)
    assert len(read_sweep_csv(out)) == 3
    # fresh computation of the full grid gives identical records
    full = tmp_path / "full.csv"
    assert main(["sweep", "--lattice", "rhg", "--model", "circuit-z",
                 "--eta", "100", "--trials", "40", "--seed", "9",
                 "--out", str(full), "--d-list", "3",
                 "--p-list", "0.01 0.02 0.03"]) == 0
    assert read_sweep_csv(full) == read_sweep_csv(out) or \
        [r.failures for r in read_sweep_csv(full)] == [r.failures for r in read_sweep_csv(out)]


def test_sweep_resume_survives_truncated_tail(tmp_path):
    out = tmp_path / "sweep.csv"
    base = ["sweep", "--lattice", "rhg", "--model", "circuit-z", "--eta", "100",
            "--trials", "40", "--seed", "9", "--out", str(out), "--d-list", "3",
            "--p-list", "0.01 0.02 0.03"]
    assert main(base) == 0
    reference = read_sweep_csv(out)
    # simulate a writer killed mid-row: chop the last line in half
    raw = out.read_bytes()
    out.write_bytes(raw[:raw.rfind(b"\n", 0, -1) + 20])
    assert main(base + ["--resume"]) == 0
    recovered = read_sweep_csv(out)
    assert [  # the chopped point is recomputed identically
        (r.p_cz, r.failures) for r in recovered
    ] == [(r.p_cz, r.failures) for r in reference]


def test_config_file_with_flag_override(tmp_path):
    cfg = {"lattice": "rhg", "model": "circuit-z", "eta": "100",
           "d_list": [3], "p_list": [0.01], "trials": 30, "seed": 2,
           "out": str(tmp_path / "from_file.csv")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["sweep", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "from_file.csv").exists()
    # flag overrides the file's output path
    assert main(["sweep", "--config", str(cfg_path),
                 "--out", str(tmp_path / "flag.csv")]) == 0
    assert (tmp_path / "flag.csv").exists()


def test_fit_recovers_planted_threshold(tmp_path, capsys):
    from ftcluster.experiment import record_to_row, CSV_COLUMNS, CSV_SCHEMA
    import csv as csv_mod

    records = synthetic_records(0.02, 1.0, 0.1, 2.0, 5.0, (5, 7, 9),
                                tuple(np.linspace(0.016, 0.024, 10)),
                                50_000, seed=6)
    path = tmp_path / "synthetic.csv"
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv_mod.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(record_to_row(rec))
    code = main(["fit", "--input", str(path), "--n-boot", "40"])
    out = capsys.readouterr().out
    assert code == 0
    p_th = float([ln for ln in out.splitlines() if ln.startswith("p_th")][0].split()[1])
    assert abs(p_th - 0.02) < 0.002


def test_fit_single_d_is_validation_error(tmp_path, capsys):
    from ftcluster.experiment import record_to_row, CSV_COLUMNS
    import csv as csv_mod

    records = synthetic_records(0.02, 1.0, 0.1, 2.0, 5.0, (5,),
                                tuple(np.linspace(0.016, 0.024, 8)), 1000, 6)
    path = tmp_path / "bad.csv"
    with open(path, "w", newline="") as fh:
        writer = csv_mod.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(record_to_row(rec))
    assert main(["fit", "--input", str(path), "--n-boot", "10"]) == 1


def test_fit_deterministic_sigma(tmp_path, capsys):
    from ftcluster.experiment import record_to_row, CSV_COLUMNS
    import csv as csv_mod

    records = synthetic_records(0.02, 1.0, 0.1, 2.0, 5.0, (5, 7),
                                tuple(np.linspace(0.016, 0.024, 8)), 20_000, 6)
    path = tmp_path / "synth.csv"
    with open(path, "w", newline="") as fh:
        writer = csv_mod.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(record_to_row(rec))
    outs = []
    for _ in range(2):
        assert main(["fit", "--input", str(path), "--n-boot", "25",
                     "--boot-seed", "3"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
