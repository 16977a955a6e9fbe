"""End-to-end command tests, all run in-process through ``main``."""

import csv
import json
import threading

import pytest

from qsuc import mock_annealer
from qsuc.cli import main


@pytest.fixture
def annealer():
    server = mock_annealer.make_server()
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}/"
    server.shutdown()
    server.server_close()


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_generate_is_seed_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["generate", "--seed", "4", "--output", str(a)]) == 0
    assert main(["generate", "--seed", "4", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["generate", "--seed", "5", "--output", str(b)]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_generate_default_target_and_bad_count(tmp_path, capsys):
    out = tmp_path / "gen"
    assert main(["generate", "--out", str(out), "--n-scenarios", "3"]) == 0
    assert (out / "scenarios.json").exists()
    assert main(["generate", "--out", str(out), "--n-scenarios", "0"]) == 1
    assert "at least one scenario" in capsys.readouterr().err


def solve_tiny(out, *extra):
    args = ["solve", "--instance", "tiny", "--chi", "1.0", "--levels", "6",
            "--gap-tol", "1e-2", "--max-k", "15", "--out", str(out)]
    return main(args + list(extra))


def test_solve_tiny_writes_the_full_output_set(tmp_path):
    out = tmp_path / "run"
    assert solve_tiny(out) == 0

    doc = json.loads((out / "result.json").read_text())
    assert doc["converged"] is True
    assert doc["u_best"] == [[1, 1, 1], [0, 0, 0]]
    assert doc["best_ub"] == pytest.approx(26.7148, abs=1e-3)
    assert doc["encoding"] == {"chi": 1.0, "levels": 6}
    assert doc["wall_time"] > 0.0

    rows = read_csv(out / "benders_trace.csv")
    assert rows[0][:4] == ["k", "bitstring", "lb", "ub_candidate"]
    lbs = [float(r[2]) for r in rows[1:]]
    assert all(b >= a - 1e-9 for a, b in zip(lbs, lbs[1:]))
    # every candidate stays above lb minus the encoding quantization slack
    assert all(float(r[3]) >= float(r[2]) - 2.0 * 1.0 for r in rows[1:])

    master = read_csv(out / "phr_trace.csv")
    assert master[0] == ["iteration", "block", "bitstring", "residual", "sigma"]
    assert len(master) > 1

    for h in (0, 1):
        table = read_csv(out / f"dispatch_{h}.csv")
        assert table[0][:4] == ["t", "load", "wind", "net_load"]
        n_gen = len(table[0]) - 5
        for row in table[1:]:
            net = float(row[3])
            served = sum(float(v) for v in row[4 : 4 + n_gen]) + float(row[-1])
            assert served == pytest.approx(net, abs=1e-4)


def test_solve_monolithic_reaches_the_same_schedule(tmp_path):
    block = tmp_path / "block"
    mono = tmp_path / "mono"
    assert solve_tiny(block) == 0
    assert solve_tiny(mono, "--monolithic") == 0
    a = json.loads((block / "result.json").read_text())
    b = json.loads((mono / "result.json").read_text())
    assert a["u_best"] == b["u_best"]
    assert b["best_ub"] == pytest.approx(a["best_ub"], abs=1e-6)


def test_solve_reports_non_convergence(tmp_path):
    out = tmp_path / "capped"
    rc = solve_tiny(out, "--gap-tol", "1e-9", "--max-k", "1")
    assert rc == 2
    doc = json.loads((out / "result.json").read_text())
    assert doc["converged"] is False and doc["iterations"] == 1


def test_verify_paper_passes_all_rows(capsys):
    assert main(["verify-paper"]) == 0
    stream = capsys.readouterr().out
    assert stream.count("  pass") == 6  # status column; excludes the summary line
    assert "all pass" in stream
    assert "FAIL" not in stream


def test_verify_paper_monolithic_passes(capsys):
    assert main(["verify-paper", "--monolithic"]) == 0
    assert "all pass" in capsys.readouterr().out


def test_qubo_dump_emits_the_wire_payload(tmp_path, capsys):
    assert main(["qubo-dump", "--instance", "tiny"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_commitment_vars"] == 6
    assert doc["encoding"] == {"chi": 2.0, "levels": 8, "base_index": 6}
    assert doc["qubo"]["n"] == 14
    assert len(doc["qubo"]["linear"]) == 14
    assert doc["constraints"] == []

    target = tmp_path / "master.json"
    assert main(["qubo-dump", "--instance", "tiny", "--levels", "4",
                 "--output", str(target)]) == 0
    saved = json.loads(target.read_text())
    assert saved["qubo"]["n"] == 10


def test_bench_energies_are_seed_deterministic(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["bench", "--sizes", "3,5", "--repeats", "2", "--seed", "7"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    rows_a, rows_b = read_csv(a), read_csv(b)
    assert rows_a[0] == ["n", "repeat", "energy", "seconds"]
    assert len(rows_a) == 5
    assert [r[:3] for r in rows_a] == [r[:3] for r in rows_b]


def test_bench_rejects_bad_arguments(tmp_path, capsys):
    assert main(["bench", "--sizes", "", "--out", str(tmp_path)]) == 1
    assert main(["bench", "--repeats", "0", "--out", str(tmp_path)]) == 1
    assert main(["bench", "--sampler", "remote", "--endpoint", "http://x/",
                 "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_config_file_with_flag_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"instance": "tiny", "chi": 1.0, "levels": 5}))
    assert main(["qubo-dump", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["encoding"] == {"chi": 1.0, "levels": 5, "base_index": 6}

    assert main(["qubo-dump", "--config", str(cfg), "--levels", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["encoding"]["levels"] == 4


def test_config_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"instance": "tiny", "nope": 1}))
    assert main(["qubo-dump", "--config", str(bad)]) == 1
    assert "unknown config fields: nope" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["qubo-dump", "--config", str(broken)]) == 1

    assert main(["qubo-dump", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["solve", "--sampler", "bogus"]) == 1
    assert main(["solve", "--instance", "tiny", "--block", "bogus"]) == 1
    assert main(["solve", "--sampler", "remote"]) == 1  # endpoint required
    capsys.readouterr()


def test_remote_round_trip_through_the_wire(annealer, capsys):
    assert main(["verify-paper", "--sampler", "remote", "--endpoint", annealer]) == 0
    assert "all pass" in capsys.readouterr().out


def test_remote_failures_exit_three(tmp_path, capsys):
    rc = main(["solve", "--instance", "tiny", "--sampler", "remote",
               "--endpoint", "http://127.0.0.1:9/", "--timeout", "0.2",
               "--max-k", "1", "--out", str(tmp_path)])
    assert rc == 3
    assert "failed" in capsys.readouterr().err

    server = mock_annealer.make_server(corrupt_energy=True)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address
    try:
        rc = main(["verify-paper", "--sampler", "remote",
                   "--endpoint", f"http://{host}:{port}/"])
        assert rc == 3
        assert "local evaluation" in capsys.readouterr().err
    finally:
        server.shutdown()
        server.server_close()
