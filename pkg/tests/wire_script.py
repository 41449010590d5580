"""The canonical wire-protocol script shared by the golden generator and
the golden tests: a fixed, ordered request sequence against a fresh
fixture server.

Masking: session ids (32 hex chars) and float loss values are pattern
checked and replaced before byte comparison; everything else must match
the committed goldens byte for byte.
"""

import re

SESSION_RE = re.compile(r"[0-9a-f]{32}")
LOSS_RE = re.compile(r'"final_loss":(null|-?[0-9]+(\.[0-9]+)?([eE][+-]?\d+)?)')


def mask(body: str) -> str:
    body = SESSION_RE.sub("<SESSION>", body)
    body = LOSS_RE.sub('"final_loss":<LOSS>', body)
    return body


def run_script(client):
    """Yield (name, status_code, raw_body_text) for each scripted step."""
    r = client.get("/api/health")
    yield "health_ok", r.status_code, r.text

    r = client.get("/api/sentences", params={"task": "normalize"})
    yield "sentences_normalize", r.status_code, r.text

    r = client.post(
        "/api/translate", json={"task": "normalize", "source": "vna casa vieja"}
    )
    yield "translate_normalize", r.status_code, r.text
    session = r.json()["session_id"]

    r = client.post("/api/correct", json={"session_id": session, "prefix": "una c"})
    yield "correct_prefix", r.status_code, r.text

    r = client.post(
        "/api/validate",
        json={"session_id": session, "target": "una casa vieja", "learn": False},
    )
    yield "validate_nolearn", r.status_code, r.text

    r = client.post(
        "/api/translate", json={"task": "modernize", "source": "dixo el rey"}
    )
    yield "translate_modernize", r.status_code, r.text
    session2 = r.json()["session_id"]

    r = client.post(
        "/api/validate",
        json={"session_id": session2, "target": "dijo el rey", "learn": True},
    )
    yield "validate_learn", r.status_code, r.text

    r = client.post("/api/translate", json={"task": "normalize", "source": ""})
    yield "err_empty_source", r.status_code, r.text

    r = client.get("/api/sentences", params={"task": "bogus"})
    yield "err_task_unavailable", r.status_code, r.text

    r = client.post(
        "/api/correct", json={"session_id": "0" * 32, "prefix": "una"}
    )
    yield "err_session_not_found", r.status_code, r.text

    r = client.post(
        "/api/translate", json={"task": "normalize", "source": "el rey quiſo"}
    )
    session3 = r.json()["session_id"]
    r = client.post("/api/correct", json={"session_id": session3, "prefix": ""})
    yield "err_empty_prefix", r.status_code, r.text


def run_divergence_script(client):
    """Separate script against a server configured with an absurd adaptation
    learning rate, to exercise the divergence guard."""
    r = client.post(
        "/api/translate", json={"task": "normalize", "source": "vna casa vieja"}
    )
    session = r.json()["session_id"]
    r = client.post(
        "/api/validate",
        json={"session_id": session, "target": "una casa vieja", "learn": True},
    )
    yield "err_adaptation_diverged", r.status_code, r.text
