"""Wire-protocol golden tests: every endpoint's bodies must match the
committed goldens byte for byte after masking session ids and loss floats
(which are pattern-checked by the masker itself).

Goldens are captured from the deterministic fixture under the compiled
backend; regenerate with scripts/gen_goldens.py.
"""

import json
import os
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from fixture_models import build_fixture_dir
from mthd.seq2seq import runtime
from mthd.server import create_app, load_config
from wire_script import SESSION_RE, mask, run_divergence_script, run_script

GOLDEN_DIR = Path(__file__).parent / "golden"

pytestmark = pytest.mark.skipif(
    runtime.backend_name() != "compiled",
    reason="goldens are captured under the compiled backend",
)


def load_golden(name):
    return json.loads((GOLDEN_DIR / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def scripted_responses(tmp_path_factory):
    root = tmp_path_factory.mktemp("golden_run")
    cfg_path = build_fixture_dir(root / "fix")
    app = create_app(load_config(cfg_path))
    out = {}
    with TestClient(app) as client:
        for name, status, body in run_script(client):
            out[name] = (status, body)
    cfg_path = build_fixture_dir(root / "fix_d", adapt_lr=1e18, tasks=("normalize",))
    app = create_app(load_config(cfg_path))
    with TestClient(app) as client:
        for name, status, body in run_divergence_script(client):
            out[name] = (status, body)
    return out


ALL_STEPS = [
    "health_ok",
    "sentences_normalize",
    "translate_normalize",
    "correct_prefix",
    "validate_nolearn",
    "translate_modernize",
    "validate_learn",
    "err_empty_source",
    "err_task_unavailable",
    "err_session_not_found",
    "err_empty_prefix",
    "err_adaptation_diverged",
]


@pytest.mark.parametrize("name", ALL_STEPS)
def test_golden(scripted_responses, name):
    status, body = scripted_responses[name]
    golden = load_golden(name)
    assert status == golden["status"], body
    assert mask(body) == golden["body"]


def test_session_ids_are_pattern_checked(scripted_responses):
    _, body = scripted_responses["translate_normalize"]
    assert SESSION_RE.search(json.loads(body)["session_id"])


def test_all_spec_error_codes_exercised(scripted_responses):
    seen = set()
    for status, body in scripted_responses.values():
        data = json.loads(body)
        if "error" in data:
            seen.add(data["error"]["code"])
        elif "code" in data:
            seen.add(data["code"])
    assert {
        "empty_source",
        "session_not_found",
        "empty_prefix",
        "task_unavailable",
        "adaptation_diverged",
    } <= seen
