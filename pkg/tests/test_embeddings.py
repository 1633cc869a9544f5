"""Embedding providers and the embedding file formats."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from triagebot.embeddings import (
    BowProvider,
    FileProvider,
    RemoteProvider,
    read_embedding_file,
    read_embedding_text,
    write_embedding_file,
    write_embedding_text,
)
from triagebot.errors import DataFormatError, MissingEmbeddingError, RemoteEmbeddingError
from triagebot.text import Vocabulary


@pytest.fixture(scope="module")
def table():
    rng = np.random.default_rng(0)
    return {f"t-{i:03d}": rng.normal(size=8).astype(np.float32).astype(np.float64)
            for i in range(40)}


class TestBinaryFormat:
    def test_roundtrip(self, table, tmp_path):
        path = tmp_path / "vectors.emb"
        write_embedding_file(table, 8, path)
        loaded, dim = read_embedding_file(path)
        assert dim == 8
        assert set(loaded) == set(table)
        for key in table:
            assert np.array_equal(loaded[key], table[key])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "vectors.emb"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(DataFormatError, match="magic"):
            read_embedding_file(path)

    def test_truncated_row(self, table, tmp_path):
        path = tmp_path / "vectors.emb"
        write_embedding_file(table, 8, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 10])
        with pytest.raises(DataFormatError, match="truncated"):
            read_embedding_file(path)

    def test_wrong_dimension_rejected_on_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_embedding_file({"a": np.zeros(3)}, 8, tmp_path / "x.emb")


class TestTextFormat:
    def test_roundtrip(self, table, tmp_path):
        path = tmp_path / "vectors.txt"
        write_embedding_text(table, 8, path)
        loaded, dim = read_embedding_text(path)
        assert dim == 8
        for key in table:
            assert np.allclose(loaded[key], table[key])

    def test_row_width_checked(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("1\t3\nid-1\t0.5 0.25\n", encoding="utf-8")
        with pytest.raises(DataFormatError) as err:
            read_embedding_text(path)
        assert err.value.line == 2


class TestProviders:
    def test_bow_dimension_tracks_vocabulary(self):
        vocab = Vocabulary(entries={"a": 0, "b": 1, "c": 2}, max_size=5, ngram_max=1)
        provider = BowProvider(vocabulary=vocab)
        assert provider.dimension == 3
        assert provider.embed(["a", "a", "c"]).tolist() == [2.0, 0.0, 1.0]

    def test_file_provider_lookup(self, table, tmp_path):
        path = tmp_path / "vectors.emb"
        write_embedding_file(table, 8, path)
        provider = FileProvider.from_file(path)
        assert provider.dimension == 8
        assert np.array_equal(provider.embed([], item_id="t-001"), table["t-001"])

    def test_file_provider_missing_id(self, table):
        provider = FileProvider(table=table, dimension=8)
        with pytest.raises(MissingEmbeddingError):
            provider.embed([], item_id="nope")
        with pytest.raises(MissingEmbeddingError):
            provider.embed([], item_id=None)


class _VectorizerHandler(BaseHTTPRequestHandler):
    delay = 0.0
    dimension = 4

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        if self.delay:
            time.sleep(self.delay)
        vector = [float(len(body.get("text", ""))) + i for i in range(self.dimension)]
        payload = json.dumps({"vector": vector}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def vectorizer_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _VectorizerHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/vectorize"
    server.shutdown()


class TestRemoteProvider:
    def test_happy_path(self, vectorizer_server):
        _VectorizerHandler.delay = 0.0
        provider = RemoteProvider(endpoint=vectorizer_server, dimension=4, timeout=5.0)
        vector = provider.embed(["ola", "mundo"])
        assert vector.shape == (4,)
        assert vector[0] == len("ola mundo")

    def test_timeout_is_hard_error(self, vectorizer_server):
        _VectorizerHandler.delay = 1.5
        provider = RemoteProvider(endpoint=vectorizer_server, dimension=4, timeout=0.2)
        try:
            with pytest.raises(RemoteEmbeddingError):
                provider.embed(["oi"])
        finally:
            _VectorizerHandler.delay = 0.0

    def test_dimension_mismatch_rejected(self, vectorizer_server):
        _VectorizerHandler.delay = 0.0
        provider = RemoteProvider(endpoint=vectorizer_server, dimension=9, timeout=5.0)
        with pytest.raises(RemoteEmbeddingError, match="shape"):
            provider.embed(["oi"])

    def test_unreachable_endpoint(self):
        provider = RemoteProvider(
            endpoint="http://127.0.0.1:1/vectorize", dimension=4, timeout=0.5)
        with pytest.raises(RemoteEmbeddingError):
            provider.embed(["oi"])
