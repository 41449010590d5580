#!/usr/bin/env python3
"""Regenerate the committed golden wire-protocol bodies.

Run from the repo root:  python3 scripts/gen_goldens.py
Rebuilds the deterministic fixture server and records each scripted
response (masked) under tests/golden/.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from fastapi.testclient import TestClient

from fixture_models import build_fixture_dir
from mthd.server import create_app, load_config
from wire_script import mask, run_script, run_divergence_script

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = build_fixture_dir(Path(tmp) / "fix")
        app = create_app(load_config(cfg_path))
        with TestClient(app) as client:
            for name, status, body in run_script(client):
                out = {"status": status, "body": mask(body)}
                (GOLDEN_DIR / f"{name}.json").write_text(
                    json.dumps(out, ensure_ascii=False, indent=2) + "\n",
                    encoding="utf-8",
                )
                print(f"wrote {name}: {status}")
        cfg_path = build_fixture_dir(
            Path(tmp) / "fix_diverge", adapt_lr=1e18, tasks=("normalize",)
        )
        app = create_app(load_config(cfg_path))
        with TestClient(app) as client:
            for name, status, body in run_divergence_script(client):
                out = {"status": status, "body": mask(body)}
                (GOLDEN_DIR / f"{name}.json").write_text(
                    json.dumps(out, ensure_ascii=False, indent=2) + "\n",
                    encoding="utf-8",
                )
                print(f"wrote {name}: {status}")


if __name__ == "__main__":
    main()
