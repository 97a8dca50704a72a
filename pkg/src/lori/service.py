"""HTTP/JSON API over the analysis pipeline with a file-backed store.

Stateless handlers over an on-disk store: reports and letter payloads
are written once, atomically, by an in-process worker pool and served
back byte-identical afterwards (GETs never touch a model). One active
job per applicant at a time; uploading identical bytes again returns
the already-completed job instead of reprocessing.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from fastapi import FastAPI, Request, Response

from . import PIPELINE_VERSION
from ._util import atomic_write_text, format_fraction, stable_json
from .classify import ClassifierHandle, LexiconClassifier, load_phrase_library
from .errors import LoriError, StageError
from .extract import lexicon_extraction, summarize
from .pipeline import (
    BoundarySpec,
    ExtractFn,
    FixtureExtractor,
    SummarizeFn,
    TextExtractor,
    build_report,
    content_digest,
    ingest_document,
    letter_payload,
    report_to_json,
)
from .scripted import TemplateSummaryClient


@dataclass
class ServiceRuntime:
    """Everything the pipeline needs, bundled so tests can inject
    scripted engines and production can inject real models."""

    extractor: TextExtractor
    classifier: ClassifierHandle
    extract_fn: ExtractFn
    summarize_fn: SummarizeFn
    pipeline_version: str = PIPELINE_VERSION
    model_ids: dict = field(default_factory=dict)
    max_workers: int = 2


def default_runtime(classifier: ClassifierHandle | None = None,
                    extractor: TextExtractor | None = None,
                    prompts_dir: str | Path | None = None) -> ServiceRuntime:
    """Fully offline runtime: lexicon classifier, lexicon phrase
    extraction, template summaries, fixture text extraction."""
    from .extract import PromptTemplates

    library = load_phrase_library()
    classifier = classifier or LexiconClassifier(library)
    extractor = extractor or FixtureExtractor()
    summary_client = TemplateSummaryClient()
    templates = PromptTemplates(prompts_dir) if prompts_dir else None
    return ServiceRuntime(
        extractor=extractor,
        classifier=classifier,
        extract_fn=lambda sentence, micro: lexicon_extraction(sentence, micro, library),
        summarize_fn=lambda phrases: summarize(phrases, summary_client, templates=templates),
        model_ids={
            "classifier": classifier.backend_id,
            "extraction": "lexicon/1",
            "summary": summary_client.model_id,
        },
    )


class Store:
    """File layout: jobs/, letters/, applicants/<hashed id>/{meta,report}."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        (self.root / "letters").mkdir(parents=True, exist_ok=True)
        (self.root / "applicants").mkdir(parents=True, exist_ok=True)

    @staticmethod
    def safe_id(applicant_id: str) -> str:
        return hashlib.sha256(applicant_id.encode("utf-8")).hexdigest()[:24]

    def applicant_dir(self, applicant_id: str) -> Path:
        return self.root / "applicants" / self.safe_id(applicant_id)

    def job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def letter_path(self, letter_id: str) -> Path:
        return self.root / "letters" / f"{letter_id}.json"

    def write_job(self, record: dict) -> None:
        atomic_write_text(self.job_path(record["job_id"]), stable_json(record) + "\n")

    def read_job(self, job_id: str) -> dict | None:
        path = self.job_path(job_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def read_meta(self, applicant_id: str) -> dict | None:
        path = self.applicant_dir(applicant_id) / "meta.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def report_bytes(self, applicant_id: str) -> bytes | None:
        path = self.applicant_dir(applicant_id) / "report.json"
        if not path.exists():
            return None
        return path.read_bytes()

    def fail_interrupted_jobs(self) -> None:
        """A restart orphans in-process jobs; mark them so clients never
        wait on a state that can no longer change."""
        for path in (self.root / "jobs").glob("*.json"):
            record = json.loads(path.read_text(encoding="utf-8"))
            if record.get("state") in ("queued", "running"):
                record["state"] = "failed"
                record["error"] = "interrupted by service restart"
                self.write_job(record)


def _json_response(payload_text: str, status: int = 200) -> Response:
    return Response(content=payload_text, status_code=status, media_type="application/json")


def _error(status: int, message: str) -> Response:
    return _json_response(stable_json({"error": message}) + "\n", status)


def create_app(
    store_dir: str | Path,
    runtime: ServiceRuntime | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    runtime = runtime or default_runtime()
    store = Store(store_dir)
    store.fail_interrupted_jobs()

    executor = ThreadPoolExecutor(max_workers=runtime.max_workers)
    active_jobs: dict[str, str] = {}  # applicant_id -> job_id
    lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        executor.shutdown(wait=True)

    app = FastAPI(title="lori", lifespan=lifespan)

    health_payload = stable_json(
        {
            "pipeline_version": runtime.pipeline_version,
            "models": runtime.model_ids,
        }
    ) + "\n"

    def run_job(job: dict, data: bytes, boundary: BoundarySpec) -> None:
        applicant_id = job["applicant_id"]
        try:
            job.update(state="running", stage="ingest")
            store.write_job(job)
            corpus = ingest_document(data, applicant_id, runtime.extractor, boundary)

            job.update(stage="classify")
            store.write_job(job)
            digest = content_digest(data)
            report = build_report(
                applicant_id,
                corpus,
                runtime.classifier,
                runtime.extract_fn,
                runtime.summarize_fn,
                runtime.pipeline_version,
                digest,
            )

            report_json = report_to_json(report, corpus)
            analyses = {analysis.letter_id: analysis for analysis in report.letters}
            for letter_id, analysis in analyses.items():
                atomic_write_text(
                    store.letter_path(letter_id),
                    stable_json(letter_payload(corpus, letter_id, analysis)) + "\n",
                )
            applicant_dir = store.applicant_dir(applicant_id)
            atomic_write_text(applicant_dir / "report.json", report_json)
            atomic_write_text(
                applicant_dir / "meta.json",
                stable_json(
                    {
                        "applicant_id": applicant_id,
                        "content_hash": digest,
                        "job_id": job["job_id"],
                        "letters_count": len(report.letters),
                    }
                )
                + "\n",
            )
            job.update(state="done", stage="summarize", error=None)
            store.write_job(job)
        except StageError as exc:
            job.update(state="failed", stage=exc.stage, error=str(exc.cause))
            store.write_job(job)
        except LoriError as exc:
            job.update(state="failed", error=str(exc))
            store.write_job(job)
        except Exception as exc:  # pragma: no cover - defensive
            job.update(state="failed", error=f"internal: {exc}")
            store.write_job(job)
        finally:
            with lock:
                active_jobs.pop(applicant_id, None)

    @app.post("/applicants/{applicant_id}/letters")
    async def upload_letters(applicant_id: str, request: Request):
        data = await request.body()
        if not data:
            return _error(400, "empty body")
        spec = request.query_params.get("boundary_spec", "page_breaks")
        try:
            boundary = BoundarySpec.parse(spec)
        except ValueError as exc:
            return _error(400, str(exc))

        digest = content_digest(data)
        meta = store.read_meta(applicant_id)
        if (
            meta is not None
            and meta.get("content_hash") == digest
            and store.report_bytes(applicant_id) is not None
        ):
            prior = store.read_job(meta["job_id"])
            if prior is not None and prior.get("state") == "done":
                return _json_response(stable_json(prior) + "\n", 200)

        with lock:
            if applicant_id in active_jobs:
                return _error(409, f"applicant {applicant_id} already has a job in progress")
            job = {
                "job_id": "J" + uuid.uuid4().hex[:12],
                "applicant_id": applicant_id,
                "state": "queued",
                "stage": "ingest",
                "error": None,
            }
            active_jobs[applicant_id] = job["job_id"]
        store.write_job(job)
        executor.submit(run_job, job, data, boundary)
        return _json_response(stable_json(job) + "\n", 202)

    @app.get("/applicants/{applicant_id}/report")
    async def get_report(applicant_id: str):
        body = store.report_bytes(applicant_id)
        if body is None:
            return _error(404, f"no completed report for applicant {applicant_id}")
        return Response(content=body, media_type="application/json")

    @app.get("/letters/{letter_id}")
    async def get_letter(letter_id: str):
        path = store.letter_path(letter_id)
        if not path.exists():
            return _error(404, f"unknown letter {letter_id}")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/applicants")
    async def list_applicants():
        rows = []
        for meta_path in sorted((store.root / "applicants").glob("*/meta.json")):
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            report_path = meta_path.parent / "report.json"
            if not report_path.exists():
                continue
            report = json.loads(report_path.read_text(encoding="utf-8"))
            total = sum(letter["total_sentences"] for letter in report["letters"])
            highlighted = sum(len(letter["highlights"]) for letter in report["letters"])
            rows.append(
                {
                    "applicant_id": meta["applicant_id"],
                    "letters_count": len(report["letters"]),
                    "highlight_proportion": format_fraction(Fraction(highlighted, total)),
                    "micro_label_counts": report["micro_label_counts"],
                }
            )
        rows.sort(key=lambda row: row["applicant_id"])
        return _json_response(stable_json(rows) + "\n")

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        record = store.read_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id}")
        return _json_response(stable_json(record) + "\n")

    @app.get("/health")
    async def health():
        return _json_response(health_payload)

    if ui_dir is not None:
        from starlette.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def main(store_dir: str, host: str = "127.0.0.1", port: int = 8000,
         runtime: ServiceRuntime | None = None) -> None:  # pragma: no cover - manual entry
    import uvicorn

    uvicorn.run(create_app(store_dir, runtime), host=host, port=port)
