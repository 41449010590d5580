import threading
import time

import pytest
from fastapi.testclient import TestClient

from fixture_models import build_fixture_dir
from mthd.adaptation import (
    AdaptationConfig,
    ValidatedSample,
    adapt,
    checkpoint_bytes,
    fnv1a64,
    load_checkpoint,
    read_log,
)
from mthd.decoding import Feedback, beam_search, prefix_constrained_search
from mthd.numerics import Tape
from mthd.seq2seq import sequence_nll
from mthd.server import ServerState, create_app, load_config
from mthd.server.state import RWLock
from mthd.textdata import tokenize


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("server_fixture")
    build_fixture_dir(root)
    return root


@pytest.fixture()
def client(fixture_dir, tmp_path):
    config = load_config(fixture_dir / "server.json")
    # fresh log per test
    config = type(config)(
        tasks=config.tasks,
        port=config.port,
        session_ttl_seconds=config.session_ttl_seconds,
        cors_origins=config.cors_origins,
        validated_log=str(tmp_path / "validated.jsonl"),
    )
    app = create_app(config)
    with TestClient(app, raise_server_exceptions=False) as c:
        c.server_state = app.state.server_state
        c.log_path = config.validated_log
        yield c


def make_session(client, task="normalize", source="vna casa vieja"):
    r = client.post("/api/translate", json={"task": task, "source": source})
    assert r.status_code == 200, r.text
    return r.json()


class TestSentences:
    def test_file_order(self, client, fixture_dir):
        r = client.get("/api/sentences", params={"task": "normalize"})
        assert r.status_code == 200
        got = r.json()["sentences"]
        assert got == (fixture_dir / "sentences_normalize.txt").read_text().splitlines()

    def test_unknown_task(self, client):
        r = client.get("/api/sentences", params={"task": "nope"})
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "task_unavailable"

    def test_repeated_calls_identical(self, client):
        a = client.get("/api/sentences", params={"task": "modernize"})
        b = client.get("/api/sentences", params={"task": "modernize"})
        assert a.content == b.content


class TestTranslate:
    def test_deterministic_before_learning(self, client):
        a = make_session(client)["hypothesis"]
        b = make_session(client)["hypothesis"]
        assert a == b

    def test_single_char_source(self, client):
        out = make_session(client, source="v")
        assert out["hypothesis"] is not None
        assert out["session_id"]

    def test_matches_direct_beam_search(self, client, fixture_dir):
        model, sv, tv = load_checkpoint(fixture_dir / "normalize.ckpt")
        direct = beam_search(
            model, tokenize("vna casa vieja", sv), beam_width=6, vocab=tv
        )[0].text
        assert make_session(client)["hypothesis"] == direct

    def test_empty_source(self, client):
        r = client.post("/api/translate", json={"task": "normalize", "source": ""})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "empty_source"

    def test_source_too_long(self, client):
        r = client.post(
            "/api/translate", json={"task": "normalize", "source": "x" * 600}
        )
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "source_too_long"


class TestCorrect:
    def test_prefix_postcondition(self, client):
        sess = make_session(client)
        prefix = sess["hypothesis"][:1]
        r = client.post(
            "/api/correct", json={"session_id": sess["session_id"], "prefix": prefix}
        )
        assert r.status_code == 200
        assert r.json()["hypothesis"].startswith(prefix)

    def test_full_reference_prefix(self, client):
        sess = make_session(client)
        r = client.post(
            "/api/correct",
            json={"session_id": sess["session_id"], "prefix": "una casa vieja"},
        )
        assert r.json()["hypothesis"].startswith("una casa vieja")

    def test_matches_direct_constrained_search(self, client, fixture_dir):
        model, sv, tv = load_checkpoint(fixture_dir / "normalize.ckpt")
        direct = prefix_constrained_search(
            model, tokenize("vna casa vieja", sv), Feedback("una c"),
            beam_width=6, vocab=tv,
        ).text
        sess = make_session(client)
        r = client.post(
            "/api/correct", json={"session_id": sess["session_id"], "prefix": "una c"}
        )
        assert r.json()["hypothesis"] == direct

    def test_unknown_session(self, client):
        r = client.post("/api/correct", json={"session_id": "f" * 32, "prefix": "a"})
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "session_not_found"

    def test_empty_prefix(self, client):
        sess = make_session(client)
        r = client.post(
            "/api/correct", json={"session_id": sess["session_id"], "prefix": ""}
        )
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "empty_prefix"

    def test_source_mismatch(self, client):
        sess = make_session(client)
        r = client.post(
            "/api/correct",
            json={
                "session_id": sess["session_id"],
                "prefix": "u",
                "source": "otra cosa",
            },
        )
        assert r.status_code == 409
        assert r.json()["error"]["code"] == "source_mismatch"


class TestValidate:
    def test_learn_false_logs_but_keeps_model(self, client):
        before = client.get("/api/health").json()["checksums"]["normalize"]
        sess = make_session(client)
        r = client.post(
            "/api/validate",
            json={
                "session_id": sess["session_id"],
                "target": "una casa vieja",
                "learn": False,
            },
        )
        body = r.json()
        assert body == {"learned": False, "steps": 0, "final_loss": None}
        records = read_log(client.log_path)
        assert len(records) == 1
        assert records[0]["learned"] is False
        assert records[0]["task"] == "normalize"
        after = client.get("/api/health").json()["checksums"]["normalize"]
        assert after == before

    def test_learn_true_adapts(self, client, fixture_dir):
        model, sv, tv = load_checkpoint(fixture_dir / "normalize.ckpt")
        initial = sequence_nll(
            Tape(), model, tokenize("vna casa vieja", sv), tokenize("una casa vieja", tv)
        ).item()
        before = client.get("/api/health").json()["checksums"]["normalize"]
        sess = make_session(client)
        r = client.post(
            "/api/validate",
            json={
                "session_id": sess["session_id"],
                "target": "una casa vieja",
                "learn": True,
            },
        )
        body = r.json()
        assert body["learned"] is True
        assert body["steps"] == 3
        assert body["final_loss"] < initial
        after = client.get("/api/health").json()["checksums"]["normalize"]
        assert after != before
        assert read_log(client.log_path)[0]["learned"] is True

    def test_session_closed_after_validate(self, client):
        sess = make_session(client)
        body = {
            "session_id": sess["session_id"],
            "target": "una casa vieja",
            "learn": False,
        }
        assert client.post("/api/validate", json=body).status_code == 200
        r = client.post("/api/validate", json=body)
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "session_not_found"

    def test_timestamp_is_iso_utc(self, client):
        import re

        sess = make_session(client)
        client.post(
            "/api/validate",
            json={"session_id": sess["session_id"], "target": "x", "learn": False},
        )
        ts = read_log(client.log_path)[0]["timestamp"]
        assert re.fullmatch(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{6}Z", ts)


class TestDivergence:
    def test_adaptation_diverged_restores_model(self, fixture_dir, tmp_path):
        cfg_path = build_fixture_dir(
            tmp_path / "diverge", adapt_lr=1e18, tasks=("normalize",)
        )
        app = create_app(load_config(cfg_path))
        with TestClient(app) as client:
            before = client.get("/api/health").json()["checksums"]["normalize"]
            sess = client.post(
                "/api/translate",
                json={"task": "normalize", "source": "vna casa vieja"},
            ).json()
            r = client.post(
                "/api/validate",
                json={
                    "session_id": sess["session_id"],
                    "target": "una casa vieja",
                    "learn": True,
                },
            )
            body = r.json()
            assert r.status_code == 200
            assert body["learned"] is False
            assert body["code"] == "adaptation_diverged"
            after = client.get("/api/health").json()["checksums"]["normalize"]
            assert after == before  # parameters restored bit-exactly

    def test_degraded_health_with_one_task(self, tmp_path):
        cfg_path = build_fixture_dir(tmp_path / "single", tasks=("normalize",))
        app = create_app(load_config(cfg_path))
        with TestClient(app) as client:
            body = client.get("/api/health").json()
            assert body["status"] == "degraded"
            assert body["tasks"] == ["normalize"]


class TestSessionTtl:
    def test_expired_session_behaves_as_unknown(self, fixture_dir, tmp_path):
        cfg_path = build_fixture_dir(tmp_path / "ttl", session_ttl=0.05)
        app = create_app(load_config(cfg_path))
        with TestClient(app) as client:
            sess = client.post(
                "/api/translate",
                json={"task": "normalize", "source": "vna casa vieja"},
            ).json()
            time.sleep(0.1)
            r = client.post(
                "/api/correct", json={"session_id": sess["session_id"], "prefix": "u"}
            )
            assert r.status_code == 404
            assert r.json()["error"]["code"] == "session_not_found"


class TestConcurrentAdaptation:
    def test_two_concurrent_learns_serialize(self, fixture_dir, tmp_path):
        """The final model must equal some sequential order of the two
        adaptations (checksum over both permutations)."""
        samples = [("vna casa vieja", "una casa vieja"), ("el rey quiſo", "el rey quiso")]
        expected = set()
        cfg = AdaptationConfig(steps=3, learning_rate=0.01)
        for order in (samples, samples[::-1]):
            model, sv, tv = load_checkpoint(fixture_dir / "normalize.ckpt")
            for s, t in order:
                adapt(model, sv, tv, ValidatedSample(s, t, "normalize"), cfg)
            expected.add(f"{fnv1a64(checkpoint_bytes(model, sv, tv)):016x}")

        config = load_config(fixture_dir / "server.json")
        config = type(config)(
            tasks=config.tasks,
            port=config.port,
            session_ttl_seconds=config.session_ttl_seconds,
            cors_origins=config.cors_origins,
            validated_log=str(tmp_path / "v.jsonl"),
        )
        app = create_app(config)
        with TestClient(app) as client:
            sessions = [
                client.post(
                    "/api/translate", json={"task": "normalize", "source": s}
                ).json()["session_id"]
                for s, _ in samples
            ]
            results = {}

            def do_validate(sid, target):
                results[sid] = client.post(
                    "/api/validate",
                    json={"session_id": sid, "target": target, "learn": True},
                ).json()

            threads = [
                threading.Thread(target=do_validate, args=(sid, t))
                for sid, (_, t) in zip(sessions, samples)
            ]
            for th in threads:
                th.start()
            for th in threads:
                th.join()
            assert all(r["learned"] for r in results.values()), results
            final = client.get("/api/health").json()["checksums"]["normalize"]
            assert final in expected


class TestRWLock:
    def test_writer_excludes_readers(self):
        lock = RWLock()
        order = []

        def reader():
            with lock.read():
                order.append("r")
                time.sleep(0.05)

        def writer():
            with lock.write():
                order.append("w")

        r1 = threading.Thread(target=reader)
        r1.start()
        time.sleep(0.01)
        w = threading.Thread(target=writer)
        w.start()
        time.sleep(0.01)
        r2 = threading.Thread(target=reader)
        r2.start()
        for th in (r1, w, r2):
            th.join()
        # writer drained the first reader and ran before the late reader
        assert order == ["r", "w", "r"]
