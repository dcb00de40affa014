"""End-to-end runs of every CLI subcommand."""

from __future__ import annotations

import pytest

from flowmine.cli import main
from flowmine.flows import read_event_log
from flowmine.packets import write_pcap

from conftest import CAPTURED_ROWS, rows_to_packets


@pytest.fixture()
def synth_log(tmp_path):
    path = tmp_path / "normal.csv"
    assert main(["synth", "--cases", "40", "--out", str(path)]) == 0
    return path


def test_synth_writes_readable_log(synth_log):
    log = read_event_log(synth_log)
    assert len(log) == 40


def test_synth_anomalous_to_stdout(capsys):
    assert main(["synth", "--kind", "scanlike", "--cases", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("000.SYN.") == 3


def test_ingest_pcap(tmp_path, capsys):
    pcap = tmp_path / "traffic.pcap"
    pcap.write_bytes(write_pcap(rows_to_packets(CAPTURED_ROWS)))
    out = tmp_path / "log.csv"
    rc = main(["ingest", "--input", str(pcap), "--out", str(out)])
    assert rc == 0
    assert len(read_event_log(out)) == 2
    stderr = capsys.readouterr().err
    assert "packets=39" in stderr and "cases=2" in stderr


def test_mine_writes_artifacts(tmp_path, synth_log):
    out_dir = tmp_path / "models"
    rc = main(["mine", "--input", str(synth_log), "--out", str(out_dir)])
    assert rc == 0
    for name in (
        "dfg.dot",
        "transitions.csv",
        "tree.txt",
        "inductive.pnml",
        "inductive.dot",
        "fuzzy.dot",
    ):
        assert (out_dir / name).exists(), name
    assert (out_dir / "tree.txt").read_text().startswith("seq(")


def test_mine_inductive_only(tmp_path, synth_log):
    out_dir = tmp_path / "models"
    rc = main(
        ["mine", "--input", str(synth_log), "--miner", "inductive", "--out", str(out_dir)]
    )
    assert rc == 0
    assert (out_dir / "inductive.pnml").exists()
    assert not (out_dir / "fuzzy.dot").exists()


def test_conform_training_log_is_perfect(tmp_path, synth_log):
    out = tmp_path / "fitness.csv"
    rc = main(
        [
            "conform",
            "--train",
            str(synth_log),
            "--input",
            str(synth_log),
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "category,cases,fitness,perfectly_fitting_fraction"
    assert lines[1] == "normal,40,1.000000,1.000000"


def test_check_matrix_csv(tmp_path, capsys):
    log_path = tmp_path / "scan.csv"
    assert main(["synth", "--kind", "scanlike", "--cases", "2", "--out", str(log_path)]) == 0
    out = tmp_path / "verdicts.csv"
    rc = main(["check-matrix", "--input", str(log_path), "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "case_id,matrix,verdict,index,source,target"
    assert "1,bishop,pass,,," in lines
    assert "1,rfc-strict,fail,1,SYN.,RST." in lines
    assert "passing: bishop=2/2 rfc-strict=0/2" in capsys.readouterr().err


def test_scenarios_to_directory(tmp_path, synth_log):
    out_dir = tmp_path / "scenarios"
    rc = main(["scenarios", "--input", str(synth_log), "--out", str(out_dir)])
    assert rc == 0
    rare = (out_dir / "scenarios_rare_normal.csv").read_text()
    header = rare.splitlines()[0]
    assert header.startswith("scenario,inductive-40,fuzzy-40,bishop,rfc-strict")
    assert len(rare.splitlines()) == 6
    abnormal = (out_dir / "scenarios_abnormal.csv").read_text()
    assert len(abnormal.splitlines()) == 5


def test_scenarios_matrices_only_stdout(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out
    assert "scenario,bishop,rfc-strict" in out
    assert "Duplicate pakages.,Y,N" in out


def test_export_petri(tmp_path, synth_log):
    out = tmp_path / "model.dot"
    rc = main(
        ["export", "--input", str(synth_log), "--model", "petri", "--out", str(out)]
    )
    assert rc == 0
    assert out.read_text().startswith("digraph petri {")


def test_experiment_small(tmp_path, capsys):
    out_dir = tmp_path / "exp"
    rc = main(
        [
            "experiment",
            "--sizes",
            "3,5",
            "--heldout",
            "4",
            "--anomaly-cases",
            "3",
            "--out",
            str(out_dir),
        ]
    )
    assert rc == 0
    assert (out_dir / "manifest.txt").exists()
    assert (out_dir / "size_5" / "fitness.csv").exists()
    assert "wrote" in capsys.readouterr().err


def test_missing_input_is_exit_1(tmp_path, capsys):
    rc = main(["mine", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_bad_synth_count_is_exit_1(tmp_path, capsys):
    rc = main(["synth", "--cases", "0", "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["no-such-command"],
        ["experiment", "--sizes", "3,x", "--out", "d"],
        ["mine", "--input", "log.csv"],
        [],
    ],
)
def test_usage_errors_raise_system_exit(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2
    capsys.readouterr()
