import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from tenrec import gen_lowrank, load_tensor, save_tensor, tubal_rank
from tenrec.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSynth:
    def test_writes_tensor_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "gt.tns"
        code = main(["synth", "--shape", "30,30,20", "--rank", "3", "--seed", "42",
                     "--out", str(out)])
        assert code == 0
        t = load_tensor(out)
        assert t.shape == (30, 30, 20)
        assert tubal_rank(t) <= 3
        manifest = json.loads((tmp_path / "gt.tns.manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["seed"] == 42

    def test_same_flags_identical_files(self, tmp_path):
        a, b = tmp_path / "a.tns", tmp_path / "b.tns"
        for out in (a, b):
            assert main(["synth", "--shape", "8,7,5", "--rank", "2", "--seed", "9",
                         "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_shape_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["synth", "--rank", "3", "--out", str(tmp_path / "x.tns")])
        assert err.value.code == 2

    def test_bad_shape_rejected(self, tmp_path):
        code = main(["synth", "--shape", "8,7", "--rank", "2",
                     "--out", str(tmp_path / "x.tns")])
        assert code == 2


def make_instance(tmp_path, shape=(12, 12, 6), rank=2, seed=5):
    gt = gen_lowrank(shape, rank, seed)
    gt = gt / np.max(np.abs(gt))
    path = tmp_path / "gt.tns"
    save_tensor(path, gt)
    return gt, path


COMPLETE_FLAGS = ["--beta", "1,0,0", "--mu0", "5.0", "--rho0", "1e-3",
                  "--gamma", "1e4", "--epsilon", "0.01", "--max-iter", "300"]


class TestComplete:
    def test_full_sampling_returns_input(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        out = tmp_path / "run"
        code = main(["complete", str(path), "--sr", "1.0", "--seed", "1",
                     "--out", str(out)] + COMPLETE_FLAGS)
        assert code == 0
        assert np.allclose(load_tensor(out / "recovered.tns"), gt, atol=1e-12)
        rows = read_csv(out / "metrics.csv")
        assert rows[0]["psnr"] == "inf"
        assert rows[0]["fsim"] == "n/a"

    def test_recovery_and_outputs(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        out = tmp_path / "run"
        code = main(["complete", str(path), "--sr", "0.5", "--seed", "5",
                     "--out", str(out)] + COMPLETE_FLAGS)
        assert code == 0
        rec = load_tensor(out / "recovered.tns")
        assert np.linalg.norm(rec - gt) / np.linalg.norm(gt) <= 1e-2
        trace = read_csv(out / "trace.csv")
        assert list(trace[0]) == ["iter", "inf_norm_diff", "lagrangian", "seconds"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["mu0"] == 5.0

    def test_max_iter_zero_warns_and_returns_initialization(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        out = tmp_path / "run"
        code = main(["complete", str(path), "--sr", "0.5", "--seed", "5",
                     "--out", str(out), "--max-iter", "0"])
        assert code == 0
        err = capsys.readouterr().err
        assert "warning" in err
        rec = load_tensor(out / "recovered.tns")
        assert set(np.round(rec[rec != gt], 12).ravel()) <= {0.0}

    def test_mask_file_shape_mismatch(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        bad_mask = tmp_path / "mask.tns"
        save_tensor(bad_mask, np.ones((3, 3, 3)))
        code = main(["complete", str(path), "--mask", str(bad_mask),
                     "--out", str(tmp_path / "run")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_requires_sr_or_mask(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        code = main(["complete", str(path), "--out", str(tmp_path / "run")])
        assert code == 2

    def test_nonconvergence_exit_code(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        code = main(["complete", str(path), "--sr", "0.5", "--seed", "5",
                     "--out", str(tmp_path / "run"), "--max-iter", "2",
                     "--tol", "1e-300"] + COMPLETE_FLAGS[:-2])
        assert code == 3

    def test_config_file_precedence(self, tmp_path, capsys):
        gt, path = make_instance(tmp_path)
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("mu0 = 5.0\nbeta = 1,0,0\nmax_iter = 300\n")
        out = tmp_path / "run"
        code = main(["complete", str(path), "--sr", "0.5", "--seed", "5",
                     "--config", str(cfgfile), "--gamma", "1e4", "--out", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["mu0"] == 5.0
        assert manifest["config"]["gamma"] == 1e4


class TestDenoise:
    def test_clean_lowrank_keeps_sparse_part_empty(self, tmp_path, capsys):
        t = gen_lowrank((20, 20, 6), 2, seed=11)
        path = tmp_path / "t.tns"
        save_tensor(path, t)
        out = tmp_path / "run"
        code = main(["denoise", str(path), "--out", str(out), "--beta", "1,0,0",
                     "--mu0", "2e-3", "--rho0", "2.3e-6", "--growth", "1.08",
                     "--epsilon", "0.21", "--penalty-tau", "6e-5",
                     "--tau1-scale", "0.3", "--tol", "2e-4", "--gt", str(path)])
        assert code == 0
        e = load_tensor(out / "E.tns")
        assert np.sum(np.abs(e)) / e.size <= 1e-4
        trace = read_csv(out / "trace.csv")
        assert list(trace[0]) == [
            "iter", "inf_norm_diff", "lagrangian", "seconds", "E_l1", "N_fro", "residual_fro",
        ]

    def test_synthetic_noise_metrics_row(self, tmp_path, capsys):
        t = gen_lowrank((15, 15, 5), 2, seed=3)
        t = (t - t.min()) / (t.max() - t.min())
        path = tmp_path / "t.tns"
        save_tensor(path, t)
        out = tmp_path / "run"
        code = main(["denoise", str(path), "--sp-fraction", "0.05",
                     "--gaussian-sigma", "0.2", "--seed", "7", "--out", str(out),
                     "--max-iter", "40", "--tol", "1e-300"])
        assert code in (0, 3)
        rows = read_csv(out / "metrics.csv")
        assert rows[0]["method"] == "emlcp-rpca"
        assert rows[0]["sr_or_noise"] == "sp=0.05 nu=0.2"
        assert rows[0]["fsim"] == "n/a"
        assert set(rows[0]) == {"method", "sr_or_noise", "psnr", "ssim", "fsim", "ergas"}

    def test_invalid_sp_fraction(self, tmp_path, capsys):
        t = gen_lowrank((8, 8, 4), 2, seed=2)
        path = tmp_path / "t.tns"
        save_tensor(path, t)
        code = main(["denoise", str(path), "--sp-fraction", "1.5",
                     "--out", str(tmp_path / "run")])
        assert code == 2


class TestEval:
    def test_identical_files_inf_row(self, tmp_path, capsys):
        t = np.random.default_rng(0).random((10, 10, 3))
        a = tmp_path / "a.tns"
        save_tensor(a, t)
        out = tmp_path / "m"
        code = main(["eval", str(a), str(a), "--out", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert stdout.startswith("inf,")
        rows = read_csv(out / "metrics.csv")
        assert rows[0]["psnr"] == "inf"

    def test_known_offset_20db(self, tmp_path, capsys):
        rng = np.random.default_rng(1)
        ref = rng.random((10, 10, 3))
        a, b = tmp_path / "a.tns", tmp_path / "b.tns"
        save_tensor(a, ref + 0.1)
        save_tensor(b, ref)
        code = main(["eval", str(a), str(b)])
        assert code == 0
        psnr_text = capsys.readouterr().out.split(",")[0]
        assert float(psnr_text) == pytest.approx(20.0, abs=1e-9)

    def test_shape_mismatch(self, tmp_path, capsys):
        a, b = tmp_path / "a.tns", tmp_path / "b.tns"
        save_tensor(a, np.zeros((3, 3)))
        save_tensor(b, np.zeros((4, 3)))
        assert main(["eval", str(a), str(b)]) == 1

    def test_missing_file(self, tmp_path, capsys):
        a = tmp_path / "a.tns"
        save_tensor(a, np.zeros((3, 3)))
        assert main(["eval", str(a), str(tmp_path / "nope.tns")]) == 1


def test_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "tenrec.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "synth" in proc.stdout


def test_full_pipeline_on_acceptance_instance(tmp_path, capsys):
    """synth -> complete with the shipped config -> eval, end to end."""
    from pathlib import Path

    configs = Path(__file__).resolve().parents[1] / "configs"
    gt_path = tmp_path / "gt.tns"
    assert main(["synth", "--shape", "30,30,20", "--rank", "3", "--seed", "42",
                 "--peak", "1.0", "--out", str(gt_path)]) == 0
    out = tmp_path / "run"
    assert main(["complete", str(gt_path), "--sr", "0.3", "--seed", "42",
                 "--config", str(configs / "lrtc_synthetic.cfg"),
                 "--out", str(out)]) == 0
    gt = load_tensor(gt_path)
    rec = load_tensor(out / "recovered.tns")
    assert np.linalg.norm(rec - gt) / np.linalg.norm(gt) <= 1e-2
    rows = read_csv(out / "metrics.csv")
    assert rows[0]["method"] == "emlcp-tc"
    assert float(rows[0]["psnr"]) > 30.0

    eval_out = tmp_path / "eval"
    assert main(["eval", str(out / "recovered.tns"), str(gt_path),
                 "--out", str(eval_out)]) == 0
    eval_rows = read_csv(eval_out / "metrics.csv")
    assert float(eval_rows[0]["psnr"]) > 30.0
