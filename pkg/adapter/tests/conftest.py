import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from scorer_adapter.backends import StubBackend

DATA = Path(__file__).parent / "data"


@pytest.fixture
def toy_dataset():
    return DATA / "toy_mc.jsonl"


@pytest.fixture
def golden_cases():
    path = DATA / "golden_postprocess_cases.jsonl"
    return [json.loads(line) for line in path.read_text().splitlines()]


class _StubServerHandler(BaseHTTPRequestHandler):
    """Inference-server shim that answers from a StubBackend.

    ``fail_first`` simulates a flaky endpoint: the first N requests return
    HTTP 500 before the server recovers.
    """

    backend = StubBackend(seed=0)
    fail_first = 0
    requests_seen = 0

    def do_POST(self):
        cls = type(self)
        cls.requests_seen += 1
        if cls.requests_seen <= cls.fail_first:
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"simulated outage")
            return
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        model_id = self.path.rsplit("/", 1)[-1]
        inputs = payload.get("inputs")
        if model_id == "stub-nli":
            e, n, c = self.backend.nli(inputs["text"], inputs["text_pair"])
            body = [[
                {"label": "ENTAILMENT", "score": e},
                {"label": "NEUTRAL", "score": n},
                {"label": "CONTRADICTION", "score": c},
            ]]
        elif model_id == "stub-qa2d":
            text = inputs
            question = text.split("question: ", 1)[1].split(" answer: ", 1)[0]
            answer = text.rsplit(" answer: ", 1)[1]
            body = [{"generated_text": self.backend.qa2d(question, answer)}]
        elif "choices" in inputs:
            body = {"scores": self.backend.mc_scores(
                inputs["question"], inputs["context"], inputs["choices"])}
        else:
            answer, score = self.backend.extract_answer(inputs["question"], inputs["context"])
            body = {"answer": answer, "score": score}
        encoded = json.dumps(body).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(encoded)))
        self.end_headers()
        self.wfile.write(encoded)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    """(base_url, handler_class) for a local inference-server shim."""
    _StubServerHandler.fail_first = 0
    _StubServerHandler.requests_seen = 0
    server = HTTPServer(("127.0.0.1", 0), _StubServerHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _StubServerHandler
    server.shutdown()
    thread.join(timeout=5)
