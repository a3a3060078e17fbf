"""Capture the console-fidelity fixture.

Trains the bundled mini model, then walks the scripted slider sequence the
frontend test replays: each step's forecast is taken from the real HTTP service
(in-process) and cross-checked against the CLI's printed range for the same
class vector and seed before being frozen into the fixture. The frontend test
asserts its displayed values equal these, to display precision.
"""

from __future__ import annotations

import contextlib
import io
import json
import re
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient

from conftest import MINI_CONFIG, mini_dataset_csv
from rangecast.cli import main as cli_main
from rangecast.service import create_app

ROUTE = "ALPHA"
MONTHS = 12
SCENARIO_SEED = 777

# The scripted slider sequence; the frontend replays exactly these operations.
SCRIPT = [
    {"op": "init", "fill": 0.5},
    {"op": "edit", "index": 6, "value": 1.2},
    {"op": "half", "half": 1, "value": 1.0},
    {"op": "edit", "index": 0, "value": 0.0},
    {"op": "half", "half": 0, "value": 0.0},
    {"op": "edit", "index": 3, "value": 1.5},
]


def apply_op(vector: list[float], op: dict) -> list[float]:
    if op["op"] == "init":
        return [op["fill"]] * MONTHS
    out = list(vector)
    if op["op"] == "edit":
        out[op["index"]] = op["value"]
    elif op["op"] == "half":
        begin = op["half"] * 6
        out[begin : begin + 6] = [op["value"]] * 6
    return out


def cli_range(artifact: Path, vector: list[float]) -> tuple[str, str]:
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = cli_main([
            "forecast", "--artifact", str(artifact),
            "--class-vector", ",".join(repr(v) for v in vector),
            "--months", str(MONTHS), "--seed", str(SCENARIO_SEED),
        ])
    assert code == 0, buffer.getvalue()
    match = re.search(r"range \[([0-9.]+), ([0-9.]+)\]", buffer.getvalue())
    assert match, buffer.getvalue()
    return match.group(1), match.group(2)


def main() -> None:
    ws = Path(tempfile.mkdtemp(prefix="console_fixture_"))
    (ws / "mini_dataset.csv").write_text(mini_dataset_csv())
    (ws / "run.cfg").write_text(MINI_CONFIG)
    assert cli_main(["train", "--config", str(ws / "run.cfg"), "--route", ROUTE]) == 0
    artifact = ws / "out" / f"model_{ROUTE}.json"

    client = TestClient(create_app(ws / "mini_dataset.csv", ws / "out"))
    steps = []
    vector: list[float] = []
    for op in SCRIPT:
        vector = apply_op(vector, op)
        resp = client.post(
            "/api/forecast",
            json={"route": ROUTE, "class_vector": vector, "months": MONTHS,
                  "seed": SCENARIO_SEED},
        )
        assert resp.status_code == 200, resp.text
        body = resp.json()
        printed_low, printed_high = cli_range(artifact, vector)
        assert printed_low == f"{body['low']:.1f}", (printed_low, body["low"])
        assert printed_high == f"{body['high']:.1f}", (printed_high, body["high"])
        steps.append(
            {
                "op": op,
                "class_vector": vector,
                "response": body,
                "cli_printed_low": printed_low,
                "cli_printed_high": printed_high,
            }
        )
        print(f"{op} -> range [{printed_low}, {printed_high}]")

    history = client.get(f"/api/routes/{ROUTE}/history")
    assert history.status_code == 200
    fixture = {
        "route": ROUTE,
        "months": MONTHS,
        "seed": SCENARIO_SEED,
        "steps": steps,
        "history": history.json(),
    }
    out = REPO / "frontend" / "tests" / "fixtures" / "console_fixture.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixture, indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
