"""Golden-transcript conformance: the adapter's wire bytes must match the
frozen hello/info/score/bye exchanges exactly."""

import subprocess
import sys
from pathlib import Path

import pytest

TRANSCRIPTS = Path(__file__).parents[2] / "tests" / "golden" / "protocol"

CASES = [
    ("null_model.transcript", "NullDetector"),
    ("energy_model.transcript", "EnergyDetector"),
]


def split_transcript(name):
    sends, recvs = [], []
    for line in (TRANSCRIPTS / name).read_text().splitlines():
        if line.startswith(">"):
            sends.append(line[1:])
        elif line.startswith("<"):
            recvs.append(line[1:])
    return sends, recvs


@pytest.mark.parametrize("transcript,class_name", CASES)
def test_wire_bytes_match_golden_transcript(transcript, class_name):
    sends, expected = split_transcript(transcript)
    completed = subprocess.run(
        [sys.executable, "-m", "auddt_refscorer", "--wrapper", "builtin",
         "--class", class_name],
        input="".join(line + "\n" for line in sends),
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert completed.returncode == 0
    assert completed.stdout.splitlines() == expected


def test_malformed_request_does_not_kill_the_process():
    sends, _ = split_transcript("null_model.transcript")
    hello, score, bye = sends
    lines = [hello, "NOT JSON AT ALL", score, bye]
    completed = subprocess.run(
        [sys.executable, "-m", "auddt_refscorer", "--wrapper", "builtin",
         "--class", "NullDetector"],
        input="".join(line + "\n" for line in lines),
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert completed.returncode == 0
    replies = completed.stdout.splitlines()
    assert len(replies) == 3  # info, error, result
    assert '"type":"error"' in replies[1]
    assert '"type":"result"' in replies[2]


def test_console_entry_point_usage_error():
    completed = subprocess.run(
        [sys.executable, "-m", "auddt_refscorer", "--wrapper", "builtin"],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert completed.returncode == 2
