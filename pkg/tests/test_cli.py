from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import FIXTURES
from lori._util import read_ndjson, write_ndjson
from lori.cli import cli

APPLICANT = "ming-001"


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args, **kwargs):
    result = runner.invoke(cli, args, catch_exceptions=False, **kwargs)
    return result


class TestPrep:
    def test_segments_letter(self, runner, tmp_path):
        source = tmp_path / "letter.txt"
        source.write_text(
            "She leads the team daily. He follows along. Budgets were tight this year. "
            "A very long sentence about many things that happened in the laboratory over time."
        )
        out = tmp_path / "sentences.ndrec"
        result = invoke(runner, ["prep", "--input", str(source), "--output", str(out),
                                 "--no-iqr"])
        assert result.exit_code == 0, result.output
        rows = [rec for _, rec in read_ndjson(out)]
        assert len(rows) == 4
        assert rows[0]["letter_id"] == "letter"
        assert all("repaired_text" in row for row in rows)

    def test_iqr_applied(self, runner, tmp_path):
        source = tmp_path / "letter.txt"
        source.write_text("Tiny. Medium sentence here one. Medium sentence here two. "
                          "An extremely long sentence that drags on and on well past everything.")
        out = tmp_path / "s.ndrec"
        result = invoke(runner, ["prep", "--input", str(source), "--output", str(out)])
        assert result.exit_code == 0
        assert "iqr bounds" in result.output
        rows = [rec for _, rec in read_ndjson(out)]
        assert 0 < len(rows) < 4

    def test_refuses_overwrite_without_force(self, runner, tmp_path):
        source = tmp_path / "letter.txt"
        source.write_text("One sentence only here.")
        out = tmp_path / "out.ndrec"
        out.write_text("occupied")
        result = runner.invoke(cli, ["prep", "--input", str(source), "--output", str(out)])
        assert result.exit_code != 0

    def test_missing_flag_usage_error(self, runner):
        result = runner.invoke(cli, ["prep"])
        assert result.exit_code == 2  # click usage error inside test runner
        assert "Missing option" in result.output


class TestFeatures:
    def test_feature_matrix(self, runner, tmp_path):
        sentences = tmp_path / "s.ndrec"
        write_ndjson(sentences, [
            {"sentence_id": "s0", "letter_id": "L", "text": "She leads the team.",
             "start": 0, "end": 19, "char_length": 19, "token_count": 4},
        ])
        out = tmp_path / "features.ndrec"
        stats = tmp_path / "stats.json"
        result = invoke(runner, [
            "features", "--sentences", str(sentences), "--output", str(out),
            "--normalize", "--stats-out", str(stats),
        ])
        assert result.exit_code == 0, result.output
        rows = [rec for _, rec in read_ndjson(out)]
        assert len(rows) == 1
        assert len(rows[0]["values"]) == 119
        assert stats.exists()


class TestWeaklabel:
    def test_scripted_all_abstain(self, runner, tmp_path):
        out = tmp_path / "weak.ndrec"
        report = tmp_path / "coverage.json"
        script = tmp_path / "lf.json"
        script.write_text("{}")
        result = invoke(runner, [
            "weaklabel",
            "--corpus", str(FIXTURES / "corpus_small"),
            "--output", str(out),
            "--report", str(report),
            "--lf", f"scripted:quiet:{script}",
        ])
        assert result.exit_code == 0, result.output
        assert out.read_text() == ""
        coverage = json.loads(report.read_text())
        assert coverage["per_lf_coverage"] == {"quiet": 0.0}

    def test_votes_aggregate_and_exclude(self, runner, tmp_path):
        out = tmp_path / "weak.ndrec"
        report = tmp_path / "coverage.json"
        script = tmp_path / "lf.json"
        table = {
            "LA1:s0": {"verdict": 1, "confidence": 0.9},
            "LA1:s1": {"verdict": 0, "confidence": 0.9},
            "LB1:s0": {"verdict": 1, "confidence": 0.9},
        }
        script.write_text(json.dumps(table))
        result = invoke(runner, [
            "weaklabel",
            "--corpus", str(FIXTURES / "corpus_small"),
            "--labeled", str(FIXTURES / "corpus_small"),
            "--output", str(out),
            "--report", str(report),
            "--lf", f"scripted:solo:{script}",
        ])
        assert result.exit_code == 0, result.output
        # every applicant in the labeled corpus is excluded, so nothing remains
        assert out.read_text() == ""
        coverage = json.loads(report.read_text())
        assert coverage["considered"] == 0
        assert coverage["applicant_filtered_count"] == 9


class TestTrainAndEval:
    def test_train_then_eval_round_trip(self, runner, tmp_path):
        import sys
        sys.path.insert(0, str(Path(__file__).parent))
        from _synth import synthetic_examples

        rows = [{"sentence_id": f"s{i}", "text": ex.text, "label": ex.label}
                for i, ex in enumerate(synthetic_examples(240, seed=3))]
        train_file = tmp_path / "train.ndrec"
        write_ndjson(train_file, rows)
        model_dir = tmp_path / "model"
        result = invoke(runner, ["--seed", "3", "train", "--train", str(train_file),
                                 "--output", str(model_dir)])
        assert result.exit_code == 0, result.output
        assert (model_dir / "manifest.json").exists()

    def test_eval_hand_vectors(self, runner, tmp_path):
        truth = tmp_path / "t.ndrec"
        pred = tmp_path / "p.ndrec"
        write_ndjson(truth, [
            {"sentence_id": f"s{i}", "label": label}
            for i, label in enumerate([1, 1, 0, 0])
        ])
        write_ndjson(pred, [
            {"sentence_id": f"s{i}", "label": label}
            for i, label in enumerate([1, 0, 0, 0])
        ])
        result = invoke(runner, ["eval", "--truth", str(truth), "--pred", str(pred)])
        assert result.exit_code == 0, result.output
        assert "weighted_f1 0.7333" in result.output

    def test_eval_with_kappa_and_ap(self, runner, tmp_path):
        truth = tmp_path / "t.ndrec"
        pred = tmp_path / "p.ndrec"
        write_ndjson(truth, [
            {"sentence_id": f"s{i}", "label": label}
            for i, label in enumerate([1, 0, 1, 0])
        ])
        write_ndjson(pred, [
            {"sentence_id": f"s{i}", "label": label, "confidence": conf}
            for i, (label, conf) in enumerate(zip([1, 1, 1, 0], [0.9, 0.8, 0.7, 0.6]))
        ])
        result = invoke(runner, ["eval", "--truth", str(truth), "--pred", str(pred), "--kappa"])
        assert result.exit_code == 0
        assert "average_precision 0.8333" in result.output
        assert "kappa" in result.output

    def test_learning_curve_table(self, runner, tmp_path):
        import sys
        sys.path.insert(0, str(Path(__file__).parent))
        from _synth import synthetic_examples

        rows = [{"sentence_id": f"s{i}", "text": ex.text, "label": ex.label}
                for i, ex in enumerate(synthetic_examples(300, seed=8))]
        train_file = tmp_path / "train.ndrec"
        eval_file = tmp_path / "eval.ndrec"
        write_ndjson(train_file, rows)
        write_ndjson(eval_file, rows[:60])
        out = tmp_path / "curve.json"
        result = invoke(runner, [
            "--seed", "8", "train", "--train", str(train_file),
            "--output", str(out), "--curve-sizes", "50,150", "--eval", str(eval_file),
        ])
        assert result.exit_code == 0, result.output
        table = json.loads(out.read_text())
        assert [row["size"] for row in table] == [50, 150]


class TestExtractAndAnalyze:
    def test_extract_lexicon(self, runner, tmp_path):
        sentences = tmp_path / "s.ndrec"
        text = "He led the team and was an active listener."
        write_ndjson(sentences, [
            {"sentence_id": "s0", "letter_id": "L", "text": text,
             "start": 0, "end": len(text), "char_length": len(text), "token_count": 9},
        ])
        out = tmp_path / "phrases.ndrec"
        traces = tmp_path / "traces"
        result = invoke(runner, ["extract", "--sentences", str(sentences),
                                 "--output", str(out), "--trace-dir", str(traces)])
        assert result.exit_code == 0, result.output
        rows = {(r["micro_label"]): r for _, r in read_ndjson(out)}
        assert rows["teamwork"]["phrases"] == ["led the team"]
        assert rows["communication"]["phrases"] == ["active listener"]
        assert (traces / "s0.teamwork.trace").exists()

    def test_analyze_matches_service_report(self, runner, tmp_path, three_letters_bytes):
        source = tmp_path / "doc.txt"
        source.write_bytes(three_letters_bytes)
        out = tmp_path / "report.json"
        result = invoke(runner, ["analyze", "--input", str(source),
                                 "--applicant-id", APPLICANT, "--output", str(out)])
        assert result.exit_code == 0, result.output

        from lori.service import create_app, default_runtime
        from fastapi.testclient import TestClient

        app = create_app(tmp_path / "store", default_runtime())
        with TestClient(app) as client:
            response = client.post(f"/applicants/{APPLICANT}/letters",
                                   content=three_letters_bytes)
            job_id = response.json()["job_id"]
            import time
            for _ in range(500):
                if client.get(f"/jobs/{job_id}").json()["state"] == "done":
                    break
                time.sleep(0.01)
            assert out.read_bytes() == client.get(f"/applicants/{APPLICANT}/report").content


class TestExitCodes:
    def test_validation_error_exit_1(self, tmp_path):
        import subprocess
        import sys

        result = subprocess.run(
            [sys.executable, "-m", "lori.cli", "eval",
             "--truth", str(tmp_path / "missing.ndrec"),
             "--pred", str(tmp_path / "missing.ndrec")],
            capture_output=True, text=True,
        )
        assert result.returncode == 1
        assert "error" in result.stderr.lower()

    def test_usage_error_exit_1_with_stderr(self):
        import subprocess
        import sys

        result = subprocess.run(
            [sys.executable, "-m", "lori.cli", "prep"],
            capture_output=True, text=True,
        )
        assert result.returncode == 1
        assert "--input" in result.stderr

    def test_success_exit_0(self, tmp_path):
        import subprocess
        import sys

        truth = tmp_path / "t.ndrec"
        write_ndjson(truth, [{"sentence_id": "s0", "label": 1},
                             {"sentence_id": "s1", "label": 0}])
        result = subprocess.run(
            [sys.executable, "-m", "lori.cli", "eval",
             "--truth", str(truth), "--pred", str(truth)],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert "weighted_f1 1.0000" in result.stdout
