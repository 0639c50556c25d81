import json

import pytest

from maneuverkit.cli import main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out


class TestPipeline:
    def test_synth_train_eval_smoke(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        m = tmp_path / "m.json"
        assert main(["synth", "--n", "60", "--seed", "1", "--out", str(d)]) == 0
        assert (
            main(
                [
                    "train", "--data", str(d), "--arch", "frnn-el", "--hidden", "8",
                    "--epochs", "4", "--lr", "2e-3", "--seed", "2", "--out", str(m),
                ]
            )
            == 0
        )
        code, out = run(["eval", "--model", str(m), "--data", str(d), "--pth", "0.7"], capsys)
        assert code == 0
        assert "session:" in out and "confusion" in out

    def test_hmm_arch_trains_and_sweeps(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        m = tmp_path / "hmm.json"
        main(["synth", "--n", "60", "--seed", "3", "--out", str(d)])
        assert (
            main(
                [
                    "train", "--data", str(d), "--arch", "hmm", "--states", "2",
                    "--em-iters", "4", "--seed", "2", "--out", str(m),
                ]
            )
            == 0
        )
        code, out = run(
            ["sweep", "--model", str(m), "--data", str(d), "--grid", "0.5,0.9"], capsys
        )
        assert code == 0
        assert out.count("p_th=") == 2 and "*" in out

    def test_gradcheck_passes(self, capsys):
        code, out = run(
            ["gradcheck", "--arch", "frnn-el", "--seed", "7", "--tol", "1e-4"], capsys
        )
        assert code == 0
        assert out.strip().endswith(")") and "PASS" in out

    def test_gradcheck_fails_with_impossible_tolerance(self, capsys):
        code, out = run(
            ["gradcheck", "--arch", "srnn", "--seed", "7", "--tol", "1e-18"], capsys
        )
        assert code == 1
        assert "FAIL" in out


class TestValidation:
    def test_unknown_subcommand_exits_nonzero(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code != 0

    def test_unknown_flag_exits_nonzero(self):
        with pytest.raises(SystemExit) as err:
            main(["synth", "--n", "5", "--out", "x", "--bogus"])
        assert err.value.code != 0

    def test_eval_with_dataset_as_model_is_a_clear_error(self, tmp_path, caplog):
        d = tmp_path / "d.jsonl"
        main(["synth", "--n", "5", "--seed", "0", "--out", str(d)])
        code = main(["eval", "--model", str(d), "--data", str(d)])
        assert code == 1

    def test_missing_data_file_is_reported(self, tmp_path):
        code = main(
            ["train", "--data", str(tmp_path / "nope.jsonl"), "--arch", "frnn-el",
             "--out", str(tmp_path / "m.json")]
        )
        assert code == 1

    def test_gradcheck_rejects_hmm_archs(self):
        assert main(["gradcheck", "--arch", "aiohmm"]) == 1


class TestReports:
    def test_eval_report_renders_text_and_csv(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        m = tmp_path / "m.json"
        r = tmp_path / "r.json"
        main(["synth", "--n", "40", "--seed", "5", "--out", str(d)])
        main(["train", "--data", str(d), "--arch", "frnn-el", "--hidden", "6",
              "--epochs", "2", "--lr", "2e-3", "--seed", "1", "--out", str(m)])
        main(["eval", "--model", str(m), "--data", str(d), "--out", str(r)])
        capsys.readouterr()

        code, out = run(["report", "--in", str(r), "--format", "text"], capsys)
        assert code == 0 and "counts:" in out
        code, out = run(["report", "--in", str(r), "--format", "csv"], capsys)
        assert code == 0
        assert out.startswith("metric,value")
        assert "confusion," in out

    def test_sweep_report_round_trips(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        m = tmp_path / "m.json"
        r = tmp_path / "sweep.json"
        main(["synth", "--n", "30", "--seed", "6", "--out", str(d)])
        main(["train", "--data", str(d), "--arch", "srnn", "--hidden", "6",
              "--epochs", "2", "--lr", "2e-3", "--seed", "1", "--out", str(m)])
        main(["sweep", "--model", str(m), "--data", str(d), "--grid", "0.5,0.7",
              "--out", str(r)])
        capsys.readouterr()
        code, out = run(["report", "--in", str(r), "--format", "csv"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "p_th,precision,recall,f1,ttm_steps,best"

    def test_xval_writes_table_shaped_report(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        r = tmp_path / "xval.json"
        main(["synth", "--n", "50", "--seed", "7", "--out", str(d)])
        code = main(
            ["xval", "--data", str(d), "--folds", "5", "--arch", "frnn-el",
             "--hidden", "6", "--epochs", "2", "--lr", "2e-3", "--seed", "1",
             "--grid", "0.5,0.7", "--out", str(r)]
        )
        assert code == 0
        doc = json.loads(r.read_text())
        assert doc["kind"] == "xval" and len(doc["folds"]) == 5
        assert set(doc["mean"]) == {"precision", "recall", "f1", "ttm_steps"}
        assert set(doc["stderr"]) == {"precision", "recall", "f1", "ttm_steps"}


class TestStreaming:
    def test_stream_mode_emits_probabilities(self, tmp_path, capsys, monkeypatch):
        import io

        d = tmp_path / "d.jsonl"
        m = tmp_path / "m.json"
        main(["synth", "--n", "30", "--seed", "8", "--out", str(d)])
        main(["train", "--data", str(d), "--arch", "frnn-el", "--hidden", "6",
              "--epochs", "1", "--seed", "1", "--out", str(m)])
        capsys.readouterr()
        steps = [
            {"x": [1, 0, 0, 50, 52, 48], "z": [0.1] * 9},
            {"x": [1, 0, 0, 50, 52, 48], "z": [0.2] * 9},
        ]
        monkeypatch.setattr("sys.stdin", io.StringIO("\n".join(json.dumps(s) for s in steps)))
        code, out = run(["anticipate", "--model", str(m), "--pth", "0.99", "--stream"], capsys)
        assert code == 0
        lines = [json.loads(l) for l in out.strip().splitlines()]
        assert [l["t"] for l in lines] == [1, 2]
        for l in lines:
            assert abs(sum(l["probs"].values()) - 1.0) < 1e-9

    def test_dataset_mode_prints_per_sample_decisions(self, tmp_path, capsys):
        d = tmp_path / "d.jsonl"
        m = tmp_path / "m.json"
        main(["synth", "--n", "10", "--seed", "9", "--out", str(d)])
        main(["train", "--data", str(d), "--arch", "frnn-el", "--hidden", "6",
              "--epochs", "1", "--seed", "1", "--out", str(m)])
        capsys.readouterr()
        code, out = run(["anticipate", "--model", str(m), "--data", str(d), "--pth", "0.5"], capsys)
        assert code == 0
        lines = [json.loads(l) for l in out.strip().splitlines()]
        assert len(lines) == 10
        assert {"id", "predicted", "actual", "t_pred", "ttm_steps", "ttm_seconds"} <= set(lines[0])
