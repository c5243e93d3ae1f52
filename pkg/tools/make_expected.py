"""Regenerate the expected-report fixtures under tests/fixtures/expected.

Each entry of runs.json is executed through the CLI under --deterministic and
the data rows plus the config hash are stored, so the fixtures do not depend on
the installed numpy/scipy version strings.
"""
from __future__ import annotations

import contextlib
import io
import json
from pathlib import Path

from chainkit.cli import main

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "expected"


def report_body(text: str) -> str:
    keep = [ln for ln in text.splitlines() if not ln.startswith("# chainkit ")]
    return "\n".join(keep) + "\n"


def run_entry(entry: dict) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        status = main([entry["subcommand"], "--config", entry["instance"], "--deterministic", *entry["args"]])
    return status, buf.getvalue()


def main_() -> None:
    runs = json.loads((ROOT / "runs.json").read_text())
    for entry in runs:
        status, text = run_entry(entry)
        (ROOT / f"{entry['name']}.csv").write_text(f"# exit {status}\n" + report_body(text))
        print(entry["name"], status)


if __name__ == "__main__":
    main_()
