"""Acceptance gate: one test per criterion, each printing a PASS line and
holding to its runtime budget. Run with `pytest tests/test_acceptance.py -v -s`.
"""

from __future__ import annotations

import random
import time

import pytest
from fastapi.testclient import TestClient

from conftest import GOLDEN, make_scripted_runtime
from _synth import synthetic_examples


def budget(name: str, started: float, limit_seconds: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < limit_seconds, f"{name} took {elapsed:.2f}s, budget {limit_seconds}s"
    print(f"ACCEPTANCE PASS: {name} ({elapsed:.2f}s < {limit_seconds:.0f}s)")


def test_metrics_oracle_suite():
    started = time.perf_counter()
    from lori.evalmetrics import ConfusionMatrix, weighted_metrics
    from test_evalmetrics import brute_force_report

    rng = random.Random(20260810)
    for _ in range(10_000):
        n = rng.randint(1, 40)
        y_true = [rng.randint(0, 1) for _ in range(n)]
        y_pred = [rng.randint(0, 1) for _ in range(n)]
        report = weighted_metrics(y_true=y_true, y_pred=y_pred)
        per_class, weighted, accuracy = brute_force_report(y_true, y_pred)
        assert abs(report.weighted_precision - weighted[0]) < 1e-12
        assert abs(report.weighted_recall - weighted[1]) < 1e-12
        assert abs(report.weighted_f1 - weighted[2]) < 1e-12
        assert abs(report.accuracy - accuracy) < 1e-12
        for cls in (0, 1):
            for i, metric in enumerate(("precision", "recall", "f1")):
                assert abs(report.per_class[cls][metric] - per_class[cls][i]) < 1e-12

    for fp in range(41):
        cm = ConfusionMatrix(tp=240, fp=fp, fn=40 - fp, tn=244)
        assert abs(weighted_metrics(cm=cm).accuracy - 484 / 524) < 1e-9

    budget("metrics oracle suite", started, 10.0)


def test_kappa_suite():
    started = time.perf_counter()
    from lori.evalmetrics import cohen_kappa

    assert cohen_kappa([1, 0, 1, 0], [1, 0, 1, 0]).kappa == 1.0

    zero = cohen_kappa([1, 1, 0, 0], [1, 0, 0, 1])
    assert abs(zero.kappa - 0.0) < 1e-12
    half = cohen_kappa([1, 1, 1, 0], [1, 1, 0, 0])
    assert abs(half.kappa - 0.5) < 1e-12

    rng = random.Random(65)
    for _ in range(1_000):
        n = rng.randint(1, 50)
        a = [rng.randint(0, 1) for _ in range(n)]
        b = [rng.randint(0, 1) for _ in range(n)]
        assert abs(cohen_kappa(a, b).kappa - cohen_kappa(b, a).kappa) < 1e-12

    budget("kappa suite", started, 5.0)


def test_weak_supervision_suite():
    started = time.perf_counter()
    from lori.weaksup import (
        EXCLUDED,
        LabelVote,
        ScriptedLF,
        ThresholdPolicy,
        WeakLabelRecord,
        aggregate,
        build_weak_dataset,
    )
    from test_weaksup import brute_force_aggregate, make_corpus

    rng = random.Random(700)
    lf_ids = ["a", "b", "c", "rf"]
    for _ in range(10_000):
        thresholds = {lf: rng.choice([None, 0.3, 0.5, 0.7, 0.8]) for lf in lf_ids}
        votes = []
        for lf in lf_ids:
            if rng.random() < 0.2:
                votes.append(LabelVote(lf, "ABSTAIN", 0.0))
            else:
                votes.append(LabelVote(lf, rng.randint(0, 1), rng.random()))
        outcome = aggregate("s", votes, ThresholdPolicy(thresholds))
        expected = brute_force_aggregate(votes, thresholds)
        if expected is None:
            assert outcome is EXCLUDED
        else:
            assert isinstance(outcome, WeakLabelRecord) and outcome.label == expected

    for trial in range(100):
        corpus = make_corpus(rng.randint(2, 6), per_applicant=3)
        table = {sid: (rng.randint(0, 1), rng.random()) for sid in corpus.sentences}
        lf = ScriptedLF("a", table)
        previous = 1.1
        for threshold in (None, 0.25, 0.5, 0.75, 0.9):
            _, report = build_weak_dataset(
                corpus, [lf], ThresholdPolicy({"a": threshold}), set()
            )
            assert report.per_lf_coverage["a"] <= previous + 1e-15
            previous = report.per_lf_coverage["a"]

    corpus = make_corpus(30)
    excluded_applicants = {f"app{a:03d}" for a in range(0, 30, 4)}
    lf = ScriptedLF("yes", {sid: (1, 1.0) for sid in corpus.sentences})
    records, report = build_weak_dataset(
        corpus, [lf], ThresholdPolicy({"yes": None}), excluded_applicants
    )
    produced = {r.sentence_id for r in records}
    for sid in corpus.sentences:
        if corpus.applicant_of(sid) in excluded_applicants:
            assert sid not in produced
        else:
            assert sid in produced

    budget("weak-supervision suite", started, 30.0)


def test_preprocessing_suite():
    started = time.perf_counter()
    from lori.corpus import SentenceRecord
    from lori.textprep import clean_text, iqr_filter, load_splitter_config, split_conjoined

    rng = random.Random(6)

    # iqr bounds against a sort-based quantile oracle, exact
    for _ in range(1_000):
        n = rng.randint(1, 60)
        lengths = [rng.randint(1, 500) for _ in range(n)]
        sentences = [
            SentenceRecord(f"s{i}", "L", "x" * v, 0, v, v, 1)
            for i, v in enumerate(lengths)
        ]
        kept, bounds = iqr_filter(sentences)
        ordered = sorted(lengths)

        def quantile(p):
            idx = (n - 1) * p
            lo = int(idx)
            frac = idx - lo
            if lo + 1 < n:
                return ordered[lo] + frac * (ordered[lo + 1] - ordered[lo])
            return float(ordered[lo])

        assert bounds.q1 == quantile(0.25)
        assert bounds.q3 == quantile(0.75)
        assert [s.char_length for s in kept] == [
            v for v in lengths if bounds.q1 <= v <= bounds.q3
        ]

    # conjoined-word splitting against exhaustive enumeration, 500 tokens
    config = load_splitter_config()
    words = sorted(config.dictionary)

    def enumerate_best(token):
        best = None

        def recurse(rest, cost, acc):
            nonlocal best
            if not rest:
                state = (cost, len(acc), tuple(acc))
                if best is None or state < best:
                    best = state
                return
            for cut in range(1, len(rest) + 1):
                piece = rest[:cut]
                if piece in config.dictionary:
                    recurse(rest[cut:], cost + config.cost(piece), acc + [piece])

        recurse(token, 0, [])
        return None if best is None else list(best[2])

    for _ in range(500):
        token = "".join(rng.choice(words) for _ in range(rng.randint(1, 3)))
        actual = split_conjoined(token, config)
        if len(token) <= config.min_token_length or token in config.dictionary:
            assert actual == [token]
        else:
            assert actual == (enumerate_best(token) or [token])

    # clean_text idempotence on 10,000 random strings
    alphabet = "abcXYZ019 .,!?-—;:'\"()/\\\n\t_#@éß漢"
    for _ in range(10_000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        once = clean_text(text)
        assert clean_text(once) == once

    budget("preprocessing suite", started, 30.0)


def test_classifier_desk_scale():
    started = time.perf_counter()
    from lori.classify import TrainConfig, learning_curve, train_classifier
    from lori.evalmetrics import weighted_metrics

    train_set = synthetic_examples(1_000, seed=42)
    test_set = synthetic_examples(200, seed=43)
    handle = train_classifier(train_set, TrainConfig(backend="lightweight", seed=42))
    predictions = handle.predict_batch([ex.text for ex in test_set])
    report = weighted_metrics(
        y_true=[ex.label for ex in test_set],
        y_pred=[p.label for p in predictions],
    )
    assert report.weighted_f1 >= 0.95, f"weighted F1 {report.weighted_f1:.4f} < 0.95"

    rows = learning_curve(train_set, [50, 200, 800], test_set,
                          TrainConfig(backend="lightweight", seed=42))
    assert [row["size"] for row in rows] == [50, 200, 800]
    for row in rows:
        assert set(row) == {"size", "weighted_f1", "weighted_precision", "weighted_recall"}
        assert all(0.0 <= row[k] <= 1.0 for k in row if k != "size")
    table = " | ".join(f"{row['size']}:{row['weighted_f1']:.3f}" for row in rows)
    print(f"  learning curve (informational): {table}")

    budget("classifier desk-scale check", started, 120.0)


def test_react_suite():
    started = time.perf_counter()
    from lori.corpus import MicroLabel, SentenceRecord
    from lori.extract import audit_verification_isolation, extract_micro_phrases
    from lori.scripted import PolicyDriver, ScriptedVerifier, SequenceClient

    text = (
        "He is an excellent communicator and a skilled collaborator when working on teams."
    )
    sentence = SentenceRecord("s1", "L1", text, 0, len(text), len(text), len(text.split()))

    replay_driver = SequenceClient([
        "Thought: I should first extract phrases which contain skills related to "
        "teamwork.\nAction: extract_phrases()",
        "Thought: Are all the extracted phrases actually related to teamwork skills? "
        "I should verify each of the extracted phrases.\n"
        'Action: verify_teamwork("excellent communicator; skilled collaborator")',
        "Thought: I now know the final answer.\n"
        "Final Answer: excellent communicator; skilled collaborator",
    ])
    result = extract_micro_phrases(
        sentence, MicroLabel.TEAMWORK, replay_driver,
        SequenceClient(["excellent communicator; skilled collaborator"]),
        ScriptedVerifier(),
    )
    assert list(result.phrases) == ["excellent communicator", "skilled collaborator"]
    assert result.verified
    kinds = [step.kind for step in result.trace]
    assert kinds == ["thought", "action", "observation",
                     "thought", "action", "observation",
                     "thought", "final"]
    assert result.trace[2].content == "excellent communicator; skilled collaborator"

    rejecting = ScriptedVerifier(decide=lambda phrase, micro: phrase != "planted phrase")
    planted = extract_micro_phrases(
        sentence, MicroLabel.TEAMWORK, PolicyDriver(),
        SequenceClient(["excellent communicator; planted phrase"]), rejecting,
    )
    assert "planted phrase" not in planted.phrases
    assert planted.phrases == ("excellent communicator",)

    for run in (result, planted):
        assert run.verification_prompts, "verification must have been consulted"
        leaks = audit_verification_isolation(
            run.verification_prompts, sentence.text, run.phrases, min_length=15
        )
        assert leaks == [], f"sentence context leaked into verification: {leaks}"

    budget("reasoning-loop suite", started, 10.0)


def test_end_to_end_golden_fixture(three_letters_bytes):
    started = time.perf_counter()
    from lori.pipeline import (
        BoundarySpec,
        build_report,
        content_digest,
        ingest_document,
        report_to_json,
    )

    runtime = make_scripted_runtime()
    corpus = ingest_document(three_letters_bytes, "ming-001", runtime.extractor,
                             BoundarySpec.parse("page_breaks"))
    report = build_report(
        "ming-001", corpus, runtime.classifier, runtime.extract_fn,
        runtime.summarize_fn, runtime.pipeline_version,
        content_digest(three_letters_bytes),
    )
    body = report_to_json(report, corpus)
    golden = (GOLDEN / "applicant_report.json").read_text(encoding="utf-8")
    assert body == golden, "report deviates from the frozen golden file"

    words = len(report.summary.split())
    assert 80 <= words <= 120, f"summary word count {words} outside [80, 120]"
    for letter in report.letters:
        rendered = f"{float(letter.proportion):.4f}"
        assert rendered in body

    budget("end-to-end golden fixture", started, 30.0)


def test_service_integration(tmp_path, three_letters_bytes):
    started = time.perf_counter()
    from lori.service import create_app

    store = tmp_path / "store"
    app = create_app(store, make_scripted_runtime())
    with TestClient(app) as client:
        # upload -> job -> report round trip
        response = client.post("/applicants/ming-001/letters", content=three_letters_bytes)
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        deadline = time.monotonic() + 10
        record = None
        while time.monotonic() < deadline:
            record = client.get(f"/jobs/{job_id}").json()
            if record["state"] in ("done", "failed"):
                break
            time.sleep(0.01)
        assert record is not None and record["state"] == "done", record
        report = client.get("/applicants/ming-001/report")
        assert report.status_code == 200
        assert report.content == (GOLDEN / "applicant_report.json").read_bytes()

        # idempotent re-upload
        again = client.post("/applicants/ming-001/letters", content=three_letters_bytes)
        assert again.status_code == 200
        assert again.json()["job_id"] == job_id

        # 404 / 400 behaviors
        assert client.get("/applicants/ghost/report").status_code == 404
        assert client.get("/letters/Lnope").status_code == 404
        assert client.post("/applicants/x/letters", content=b"").status_code == 400

        # 409 while a job is active
        runtime = make_scripted_runtime()
        base_extract = runtime.extract_fn

        def slow(sentence_record, micro):
            time.sleep(0.05)
            return base_extract(sentence_record, micro)

        runtime.extract_fn = slow
        captured = {
            "report": report.content,
            "applicants": client.get("/applicants").content,
        }

    busy_app = create_app(tmp_path / "store2", runtime)
    with TestClient(busy_app) as client:
        first = client.post("/applicants/busy-1/letters", content=three_letters_bytes)
        assert first.status_code == 202
        conflict = client.post("/applicants/busy-1/letters", content=three_letters_bytes)
        assert conflict.status_code == 409
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            if client.get(f"/jobs/{first.json()['job_id']}").json()["state"] == "done":
                break
            time.sleep(0.01)

    # restart persistence: byte-identical responses from a fresh app
    restarted = create_app(store, make_scripted_runtime())
    with TestClient(restarted) as client:
        assert client.get("/applicants/ming-001/report").content == captured["report"]
        assert client.get("/applicants").content == captured["applicants"]

    budget("service integration", started, 60.0)
