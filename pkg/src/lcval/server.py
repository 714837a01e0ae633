"""HTTP API over the annotation store, serving the browser console.

Endpoints (all JSON):

* ``GET  /api/samples[?status=...]``  sample list with workflow state
* ``GET  /api/samples/{id}/patch``    per-product context windows + legends
* ``POST /api/annotations``           one round-1 expert record
* ``GET  /api/review``                the consensus queue
* ``POST /api/consensus``             one round-2 consensus record

Reads may run concurrently; every mutation is serialized through a single
lock and appended to the annotation log before the response is sent, so
readers always observe a consistent fold of the log. Errors carry a
machine-readable ``error`` code plus a ``message``. Paths outside ``/api``
serve the static console bundle when one is configured.
"""
from __future__ import annotations

import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .annotation import (
    AlreadyFinalizedError,
    AnnotationError,
    AnnotationRecord,
    AnnotationStore,
    ConfidenceLevel,
    DuplicateAnnotationError,
    LOG_HEADER,
    NotReviewableError,
    SampleStatus,
    UnknownSampleError,
    extract_patch,
    write_annotation_log,
)
from .nomenclature import GeneralClass, NomenclatureError
from .retrieval import Product


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class AnnotationService:
    """Store + products behind the API; single-writer mutation lock."""

    def __init__(
        self,
        store: AnnotationStore,
        products: list[Product],
        log_path: str | None = None,
    ):
        self.store = store
        self.products = products
        self.log_path = log_path
        self._lock = threading.Lock()

    # -- views ---------------------------------------------------------------

    def _sample_doc(self, sample_id: int) -> dict:
        sample = self.store.samples[sample_id]
        final = self.store.final_row(sample_id)
        return {
            "sample_id": sample.sample_id,
            "x": sample.x,
            "y": sample.y,
            "stratum_id": sample.stratum_id,
            "source_product": sample.source_product,
            "status": self.store.status(sample_id).value,
            "annotations": [
                {
                    "expert_id": r.expert_id,
                    "label": r.label.value,
                    "confidence": int(r.confidence),
                    "round": r.round,
                    "timestamp": r.timestamp,
                }
                for r in self.store.annotations_for(sample_id)
            ],
            "final": None
            if final is None
            else {
                "label": final.label.value,
                "confidence": int(final.confidence),
                "provenance": final.provenance,
            },
        }

    def list_samples(self, status: str | None = None) -> dict:
        with self._lock:
            docs = [self._sample_doc(sid) for sid in sorted(self.store.samples)]
        if status is not None:
            wanted = {s.value for s in SampleStatus}
            if status not in wanted:
                raise ApiError(400, "bad-status", f"status must be one of {sorted(wanted)}")
            docs = [d for d in docs if d["status"] == status]
        return {"samples": docs, "total": len(docs), "experts": list(self.store.experts)}

    def sample_patch(self, sample_id: int) -> dict:
        with self._lock:
            if sample_id not in self.store.samples:
                raise ApiError(404, "unknown-sample", f"no sample {sample_id}")
            patch = extract_patch(self.products, self.store.samples[sample_id])
        return {
            "sample_id": patch.sample_id,
            "windows": [
                {
                    "product": w.product,
                    "cell_size": w.cell_size,
                    "side": w.side,
                    "nodata": w.nodata,
                    "values": [list(row) for row in w.values],
                    "legend": {
                        str(code): {"label": label, "general": general.value}
                        for code, (label, general) in w.legend.items()
                    },
                }
                for w in patch.windows
            ],
        }

    def review_queue(self) -> dict:
        with self._lock:
            ids = self.store.review_queue()
            docs = [self._sample_doc(sid) for sid in ids]
        return {"sample_ids": ids, "samples": docs}

    # -- mutations -------------------------------------------------------------

    def _persist(self, record: AnnotationRecord) -> None:
        if self.log_path is None:
            return
        new_file = not os.path.exists(self.log_path) or os.path.getsize(self.log_path) == 0
        with open(self.log_path, "a", encoding="utf-8", newline="\n") as fh:
            if new_file:
                fh.write(",".join(LOG_HEADER) + "\n")
            fh.write(write_annotation_log([record]).splitlines()[1] + "\n")

    def post_annotation(self, body: dict) -> dict:
        record = _record_from_body(body, round_=1)
        with self._lock:
            status = _map_store_errors(lambda: self.store.record_annotation(record))
            self._persist(record)
            doc = self._sample_doc(record.sample_id)
        return {"sample_id": record.sample_id, "status": status.value, "sample": doc}

    def post_consensus(self, body: dict) -> dict:
        record = _record_from_body(body, round_=2)
        with self._lock:
            status = _map_store_errors(lambda: self.store.record_annotation(record))
            self._persist(record)
            doc = self._sample_doc(record.sample_id)
        return {"sample_id": record.sample_id, "status": status.value, "sample": doc}


def _record_from_body(body: dict, round_: int) -> AnnotationRecord:
    from .annotation import CONSENSUS_EXPERT, utc_timestamp

    if not isinstance(body, dict):
        raise ApiError(400, "bad-request", "body must be a JSON object")
    try:
        sample_id = int(body["sample_id"])
        label = GeneralClass.from_name(body["label"])
        confidence = ConfidenceLevel(int(body["confidence"]))
    except KeyError as exc:
        raise ApiError(400, "missing-field", f"missing field {exc}") from None
    except (ValueError, NomenclatureError) as exc:
        raise ApiError(400, "invalid-field", str(exc)) from None
    if round_ == 1:
        expert = body.get("expert_id")
        if not expert:
            raise ApiError(400, "missing-field", "missing field 'expert_id'")
    else:
        expert = CONSENSUS_EXPERT
    return AnnotationRecord(
        sample_id=sample_id,
        expert_id=str(expert),
        label=label,
        confidence=confidence,
        round=round_,
        timestamp=str(body.get("timestamp") or utc_timestamp()),
    )


def _map_store_errors(fn):
    try:
        return fn()
    except UnknownSampleError as exc:
        raise ApiError(404, "unknown-sample", str(exc)) from exc
    except DuplicateAnnotationError as exc:
        raise ApiError(409, "duplicate-annotation", str(exc)) from exc
    except AlreadyFinalizedError as exc:
        raise ApiError(409, "already-finalized", str(exc)) from exc
    except NotReviewableError as exc:
        raise ApiError(409, "not-reviewable", str(exc)) from exc
    except AnnotationError as exc:
        raise ApiError(400, "invalid-annotation", str(exc)) from exc


def make_handler(service: AnnotationService, static_dir: str | None, quiet: bool):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # noqa: N802
            if not quiet:
                super().log_message(fmt, *args)

        def _send_json(self, status: int, doc: dict) -> None:
            payload = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def _send_error_doc(self, exc: ApiError) -> None:
            self._send_json(exc.status, {"error": exc.code, "message": exc.message})

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                raise ApiError(400, "bad-request", "empty request body")
            try:
                return json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ApiError(400, "bad-request", f"body is not valid JSON: {exc}") from exc

        def do_GET(self):  # noqa: N802
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            try:
                if parts[:2] == ["api", "samples"] and len(parts) == 2:
                    status = parse_qs(url.query).get("status", [None])[0]
                    self._send_json(200, service.list_samples(status))
                elif (
                    parts[:2] == ["api", "samples"]
                    and len(parts) == 4
                    and parts[3] == "patch"
                ):
                    try:
                        sample_id = int(parts[2])
                    except ValueError:
                        raise ApiError(400, "bad-request", f"bad sample id {parts[2]!r}") from None
                    self._send_json(200, service.sample_patch(sample_id))
                elif parts == ["api", "review"]:
                    self._send_json(200, service.review_queue())
                elif parts and parts[0] == "api":
                    raise ApiError(404, "not-found", f"no endpoint {url.path}")
                else:
                    self._serve_static(url.path)
            except ApiError as exc:
                self._send_error_doc(exc)

        def do_POST(self):  # noqa: N802
            url = urlparse(self.path)
            try:
                body = self._read_body()
                if url.path == "/api/annotations":
                    self._send_json(201, service.post_annotation(body))
                elif url.path == "/api/consensus":
                    self._send_json(201, service.post_consensus(body))
                else:
                    raise ApiError(404, "not-found", f"no endpoint {url.path}")
            except ApiError as exc:
                self._send_error_doc(exc)

        def _serve_static(self, path: str) -> None:
            if static_dir is None:
                raise ApiError(404, "not-found", "no static bundle configured")
            root = os.path.abspath(static_dir)
            rel = path.lstrip("/") or "index.html"
            full = os.path.normpath(os.path.join(root, rel))
            if full != root and not full.startswith(root + os.sep):
                raise ApiError(404, "not-found", "path escapes static root")
            if not os.path.isfile(full):
                raise ApiError(404, "not-found", f"no such file {rel!r}")
            ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
            with open(full, "rb") as fh:
                payload = fh.read()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

    return Handler


def make_server(
    service: AnnotationService,
    bind: str = "127.0.0.1",
    port: int = 8000,
    static_dir: str | None = None,
    quiet: bool = False,
) -> ThreadingHTTPServer:
    handler = make_handler(service, static_dir, quiet)
    return ThreadingHTTPServer((bind, port), handler)
