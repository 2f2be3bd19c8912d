import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

import pytest

from distrag.geo import load_gazetteer
from distrag.graph import Complete, SpatialGraph, build_graph

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def au50_path():
    return Path(str(resources.files("distrag.data").joinpath("au50.csv")))


@pytest.fixture(scope="session")
def au50(au50_path):
    return load_gazetteer(au50_path)


@pytest.fixture(scope="session")
def au50_graph(au50):
    return build_graph(au50, Complete())


def make_prompt_graph():
    """The Adelaide listing from the SPARQL prompt's RDF example, plus the
    Newcastle-Sydney triple used in the triple-format example."""
    names = ["Adelaide", "Perth", "Launceston", "Cairns", "Ipswich", "Mount Isa",
             "Newcastle, NSW", "Sydney, NSW"]
    edges = {
        ("Adelaide", "Perth"): 2135,
        ("Adelaide", "Launceston"): 1039,
        ("Adelaide", "Cairns"): 2119,
        ("Adelaide", "Ipswich"): 1571,
        ("Adelaide", "Mount Isa"): 1582,
        ("Newcastle, NSW", "Sydney, NSW"): 160,
    }
    return SpatialGraph.from_names(names, edges)


@pytest.fixture
def prompt_graph():
    return make_prompt_graph()


class ScriptedHTTP:
    """Tiny local HTTP server that replays queued (status, headers, body) replies."""

    def __init__(self):
        self.replies = []
        self.requests = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def _handle(self):
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length) if length else b""
                outer.requests.append({"path": self.path, "headers": dict(self.headers), "body": body})
                status, headers, payload = outer.replies.pop(0) if outer.replies else (500, {}, b"")
                if isinstance(payload, (dict, list)):
                    payload = json.dumps(payload).encode()
                elif isinstance(payload, str):
                    payload = payload.encode()
                self.send_response(status)
                for k, v in headers.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            do_POST = _handle
            do_GET = _handle

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    def queue(self, status=200, body=b"", headers=None):
        self.replies.append((status, headers or {}, body))

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def http_server():
    srv = ScriptedHTTP()
    yield srv
    srv.close()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in mod.RESULTS:
        terminalreporter.write_line(mod._line(name, ok, detail))
