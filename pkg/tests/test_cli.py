"""Command-line harness: configuration, file outputs, and reproducibility."""

import json

import numpy as np
import pytest

from locc_lab.cli import (ConfigError, ExperimentConfig, main, parse_grid,
                          random_pure_state)
from locc_lab.protocols import (dejmps_s_state_oracle, discrimination_success,
                                learned_s_state_oracle, qsd_oracle, qsd_pair,
                                qsd_protocol)


# --- configuration ---------------------------------------------------------------

def test_parse_grid():
    assert parse_grid("0.05:0.95:19") == (0.05, 0.95, 19)


@pytest.mark.parametrize("text", ["0.05:0.95", "a:b:c", "0:1:2:3", "0.1"])
def test_parse_grid_rejects_malformed(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


@pytest.mark.parametrize("kwargs", [
    {"experiment": "unknown"},
    {"experiment": "qsd", "fmt": "pdf"},
    {"experiment": "s-distill", "grid": (-0.1, 0.9, 5)},
    {"experiment": "s-distill", "grid": (0.9, 0.1, 5)},
    {"experiment": "s-distill", "grid": (0.1, 0.9, 1)},
    {"experiment": "qsd", "gamma": 1.5},
    {"experiment": "channel-sim", "gamma": 0.5, "samples": 0},
    {"experiment": "channel-sim", "gamma": 0.5, "restarts": 0},
    {"experiment": "train"},
    {"experiment": "train", "task": "nonsense"},
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_haar_sampler_normalized():
    rng = np.random.default_rng(3)
    for _ in range(5):
        psi = random_pure_state(rng)
        assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-12


# --- experiment outputs -------------------------------------------------------------

def test_s_distill_csv_content(tmp_path, capsys):
    code = main(["s-distill", "--grid", "0.1:0.9:3", "--out", str(tmp_path)])
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed == [str(tmp_path / "s-distill.csv"),
                       str(tmp_path / "s-distill.svg")]
    content = (tmp_path / "s-distill.csv").read_text()
    assert "\r" not in content and content.endswith("\n")
    lines = content.splitlines()
    assert lines[0] == ("p,fidelity_learned,p_succ_learned,"
                        "fidelity_dejmps,p_succ_dejmps")
    assert len(lines) == 4
    for line, p in zip(lines[1:], (0.1, 0.5, 0.9)):
        cells = [float(c) for c in line.split(",")]
        fid_l, ps_l = learned_s_state_oracle(p)
        fid_d, ps_d = dejmps_s_state_oracle(p)
        assert np.allclose(cells, (p, fid_l, ps_l, fid_d, ps_d), atol=1e-9)
    # shortest round-trip float formatting: parsing back is lossless
    for line in lines[1:]:
        for cell in line.split(","):
            assert repr(float(cell)) == cell


def test_reruns_are_byte_identical(tmp_path):
    main(["s-distill", "--grid", "0.1:0.9:3", "--out", str(tmp_path / "a")])
    main(["s-distill", "--grid", "0.1:0.9:3", "--out", str(tmp_path / "b")])
    for name in ("s-distill.csv", "s-distill.svg"):
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes())


def test_thread_cap_does_not_change_output(tmp_path, monkeypatch):
    monkeypatch.setenv("LOCC_LAB_THREADS", "1")
    main(["qsd", "--grid", "0:1:5", "--out", str(tmp_path / "serial")])
    monkeypatch.setenv("LOCC_LAB_THREADS", "4")
    main(["qsd", "--grid", "0:1:5", "--out", str(tmp_path / "pooled")])
    assert ((tmp_path / "serial" / "qsd.csv").read_bytes()
            == (tmp_path / "pooled" / "qsd.csv").read_bytes())


def test_bad_thread_env_is_reported(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LOCC_LAB_THREADS", "many")
    code = main(["qsd", "--grid", "0:1:3", "--out", str(tmp_path)])
    assert code == 1
    assert capsys.readouterr().err.startswith("locc-lab: error:")


def test_csv_only_format_omits_svg(tmp_path):
    main(["s-distill", "--grid", "0.1:0.9:2", "--format", "csv",
          "--out", str(tmp_path)])
    assert (tmp_path / "s-distill.csv").exists()
    assert not (tmp_path / "s-distill.svg").exists()


def test_qsd_single_gamma(tmp_path):
    main(["qsd", "--gamma", "0.3", "--format", "csv", "--out", str(tmp_path)])
    lines = (tmp_path / "qsd.csv").read_text().splitlines()
    assert lines[0] == "gamma,p_succ_tuned,p_succ_noiseless_angles"
    assert len(lines) == 2
    gamma, tuned, untuned = (float(c) for c in lines[1].split(","))
    assert gamma == 0.3
    assert abs(tuned - qsd_oracle(0.3)) < 1e-9
    assert abs(untuned
               - discrimination_success(qsd_protocol(0.0), *qsd_pair(0.3))) < 1e-12
    assert untuned < tuned


def test_svg_structure(tmp_path):
    main(["qsd", "--grid", "0:1:5", "--out", str(tmp_path)])
    svg = (tmp_path / "qsd.svg").read_text()
    assert svg.startswith("<svg ") and svg.endswith("</svg>\n")
    assert svg.count("<polyline ") == 2  # one line per plotted column


def test_invalid_grid_exits_nonzero(tmp_path, capsys):
    code = main(["s-distill", "--grid", "0.9:0.1:5", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("locc-lab: error:")
    assert "start must be below stop" in err


def test_config_file_with_flag_override(tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({
        "grid": [0.1, 0.9, 2], "format": "csv", "out": str(tmp_path / "from_file"),
    }))
    # file values apply ...
    main(["s-distill", "--config", str(cfg_path)])
    assert (tmp_path / "from_file" / "s-distill.csv").exists()
    assert not (tmp_path / "from_file" / "s-distill.svg").exists()
    # ... and explicit flags override them
    main(["s-distill", "--config", str(cfg_path), "--out",
          str(tmp_path / "flagged"), "--format", "csv+svg"])
    assert (tmp_path / "flagged" / "s-distill.svg").exists()
    assert ((tmp_path / "from_file" / "s-distill.csv").read_bytes()
            == (tmp_path / "flagged" / "s-distill.csv").read_bytes())


def test_config_file_must_be_mapping(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text("[1, 2, 3]")
    code = main(["qsd", "--config", str(cfg_path), "--out", str(tmp_path)])
    assert code == 1
    assert "not a mapping" in capsys.readouterr().err


def test_train_qsd_writes_trace_and_result(tmp_path):
    code = main(["train", "--task", "qsd", "--gamma", "0.0",
                 "--restarts", "2", "--out", str(tmp_path)])
    assert code == 0
    trace_lines = (tmp_path / "train_qsd_trace.csv").read_text().splitlines()
    assert trace_lines[0] == "restart,iteration,loss"
    result = json.loads((tmp_path / "train_qsd_result.json").read_text())
    assert result["task"] == "qsd"
    assert result["inputs"] == {"gamma": 0.0}
    assert len(result["params"]) == 9
    # noiseless discrimination is learnable to near certainty
    assert result["success_probability"] > 1.0 - 1e-6
    assert abs((1.0 - result["best_loss"] / 2.0)
               - result["success_probability"]) < 1e-15


def test_train_distill_requires_p(tmp_path, capsys):
    code = main(["train", "--task", "s-distill", "--out", str(tmp_path)])
    assert code == 1
    assert "needs --p" in capsys.readouterr().err
