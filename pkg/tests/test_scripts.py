import json
import subprocess
import sys
from pathlib import Path

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def _run(name, *args):
    return subprocess.run([sys.executable, str(SCRIPTS / name), *args], capture_output=True, text=True, check=True).stdout


def test_rule_tally_counts():
    report = json.loads(_run("rule_tally.py", "--json"))
    rules = {name: entry["rows"][0]["rules"] for name, entry in report.items()}
    assert rules == {
        "GP4": {"A6": 18},
        "TC1": {"A3": 6, "A4": 2},
        "TC5": {"D11": 13},
        "TC9": {"D12": 3},
    }


def test_gap_sweep_runs():
    lines = _run("gap_sweep.py", "--steps", "3").splitlines()
    assert lines[1].split() == ["0.00", "6", "2", "0"]
    assert lines[-1].split() == ["1.00", "6", "0", "2"]
