import base64
import io
import json

import numpy as np

from auddt_refscorer.binding import ModelBinding
from auddt_refscorer.server import serve


def run_session(binding, lines):
    stdin = io.StringIO("".join(line + "\n" for line in lines))
    stdout = io.StringIO()
    code = serve(binding, stdin=stdin, stdout=stdout)
    return code, [json.loads(line) for line in stdout.getvalue().splitlines()]


def request_for(samples, entry_id="clip", rate=16000) -> str:
    raw = np.asarray(samples, dtype="<f4").tobytes()
    return json.dumps(
        {
            "type": "score",
            "id": entry_id,
            "sample_rate_hz": rate,
            "pcm_f32le_b64": base64.b64encode(raw).decode(),
        },
        separators=(",", ":"),
    )


HELLO = '{"type":"hello","protocol_version":1}'
BYE = '{"type":"bye"}'

NULL = ModelBinding("builtin", "NullDetector")
ENERGY = ModelBinding("builtin", "EnergyDetector")


def square_wave(n=512, amplitude=0.5):
    cycle = np.concatenate([np.full(8, amplitude), np.full(8, -amplitude)])
    return np.tile(cycle, n // cycle.size)


def test_null_model_answers_half_everywhere():
    code, replies = run_session(
        NULL, [HELLO, request_for([0.1, 0.9]), request_for(square_wave()), BYE]
    )
    assert code == 0
    assert replies[0]["type"] == "info" and replies[0]["name"] == "null"
    assert [r["score"] for r in replies[1:]] == [0.5, 0.5]


def test_energy_model_on_half_square_is_exactly_half():
    code, replies = run_session(ENERGY, [HELLO, request_for(square_wave()), BYE])
    assert code == 0
    assert replies[1]["score"] == 0.5


def test_responses_in_arrival_order():
    requests = [request_for([v], entry_id=f"c{i}") for i, v in enumerate([0.3, 0.9, 0.1])]
    code, replies = run_session(NULL, [HELLO] + requests + [BYE])
    assert [r["id"] for r in replies[1:]] == ["c0", "c1", "c2"]


def test_truncated_base64_yields_error_and_loop_survives():
    broken = json.dumps(
        {"type": "score", "id": "bad", "sample_rate_hz": 16000,
         "pcm_f32le_b64": "!!!not-base64!!!"},
        separators=(",", ":"),
    )
    code, replies = run_session(NULL, [HELLO, broken, request_for([0.0], "good"), BYE])
    assert code == 0
    assert replies[1]["type"] == "error" and replies[1]["id"] == "bad"
    assert replies[2]["type"] == "result" and replies[2]["id"] == "good"


def test_non_json_line_yields_error_and_loop_survives():
    code, replies = run_session(NULL, [HELLO, "garbage {", request_for([0.5]), BYE])
    assert code == 0
    assert replies[1]["type"] == "error"
    assert replies[2]["type"] == "result"


def test_model_load_failure_reports_and_exits_nonzero():
    code, replies = run_session(ModelBinding("builtin", "MissingDetector"), [HELLO])
    assert code == 1
    assert replies[0]["type"] == "error"
    assert "MissingDetector" in replies[0]["message"]


def test_per_clip_model_exception_keeps_serving(tmp_path):
    wrapper = tmp_path / "flaky.py"
    wrapper.write_text(
        "class Flaky:\n"
        "    def __init__(self, checkpoint=None, device=None, **kw):\n"
        "        pass\n"
        "    def score(self, samples, rate):\n"
        "        if samples.size == 1:\n"
        "            raise RuntimeError('single-sample clips unsupported')\n"
        "        return 0.25\n"
    )
    binding = ModelBinding(str(wrapper), "Flaky")
    code, replies = run_session(
        binding, [HELLO, request_for([0.5], "solo"), request_for([0.1, 0.2], "pair"), BYE]
    )
    assert code == 0
    assert replies[1]["type"] == "error" and "single-sample" in replies[1]["message"]
    assert replies[2]["type"] == "result" and replies[2]["score"] == 0.25


def test_out_of_range_output_is_error_without_squash(tmp_path):
    wrapper = tmp_path / "logit.py"
    wrapper.write_text(
        "class Logit:\n"
        "    def __init__(self, **kw):\n"
        "        pass\n"
        "    def score(self, samples, rate):\n"
        "        return 3.5\n"
    )
    code, replies = run_session(
        ModelBinding(str(wrapper), "Logit"), [HELLO, request_for([0.5]), BYE]
    )
    assert replies[1]["type"] == "error"
    assert "squashing" in replies[1]["message"]


def test_sigmoid_squash_opt_in(tmp_path):
    wrapper = tmp_path / "logit.py"
    wrapper.write_text(
        "class Logit:\n"
        "    def __init__(self, **kw):\n"
        "        pass\n"
        "    def score(self, samples, rate):\n"
        "        return 0.0\n"
    )
    binding = ModelBinding(str(wrapper), "Logit", squash="sigmoid")
    code, replies = run_session(binding, [HELLO, request_for([0.5]), BYE])
    assert replies[1]["type"] == "result"
    assert replies[1]["score"] == 0.5  # sigmoid(0)


def test_pcm_decodes_to_exact_float_sequence(tmp_path):
    wrapper = tmp_path / "recording.py"
    wrapper.write_text(
        "import numpy as np\n"
        "SEEN = []\n"
        "class Recorder:\n"
        "    def __init__(self, **kw):\n"
        "        pass\n"
        "    def score(self, samples, rate):\n"
        "        np.save('seen.npy', samples)\n"
        "        return 0.0\n"
    )
    sent = np.array([0.0, 0.5, -1.0, 0.33203125], dtype="<f4")
    binding = ModelBinding(str(wrapper), "Recorder")
    import os

    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        code, replies = run_session(binding, [HELLO, request_for(sent), BYE])
    finally:
        os.chdir(cwd)
    seen = np.load(tmp_path / "seen.npy")
    assert np.array_equal(seen, sent)
    # checksum echo matches what the harness computes over the same bytes
    import hashlib

    assert replies[1]["pcm_sha256"] == hashlib.sha256(sent.tobytes()).hexdigest()


def test_model_args_passed_through(tmp_path):
    wrapper = tmp_path / "tunable.py"
    wrapper.write_text(
        "class Tunable:\n"
        "    def __init__(self, checkpoint=None, device=None, bias=0.0):\n"
        "        self.bias = bias\n"
        "    def score(self, samples, rate):\n"
        "        return self.bias\n"
    )
    binding = ModelBinding(str(wrapper), "Tunable", model_args={"bias": 0.75})
    code, replies = run_session(binding, [HELLO, request_for([0.5]), BYE])
    assert replies[1]["score"] == 0.75
