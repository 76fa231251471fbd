import hashlib
import zipfile

from auddt.cli import cli
from auddt.synthcorpus import CorpusSpec, generate_corpus

from e2e_helpers import config_text, registry_yaml_for


def test_list_shows_datasets_and_groups(capsys):
    assert cli(["list"]) == 0
    out = capsys.readouterr().out
    for dataset_id in ("asvspoof5", "wavefake", "timit_tts"):
        assert dataset_id in out
    for group in ("all", "perturbation", "multilingual"):
        assert group in out
    assert out.count("(") == 28  # one display name per dataset


def test_evaluate_missing_config_is_usage_error(tmp_path, capsys):
    assert cli(["evaluate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_unknown_subcommand_is_usage_error(capsys):
    assert cli(["frobnicate"]) == 2


def test_unknown_group_fails(tmp_path, capsys):
    assert cli(["prepare", "not_a_group", "--data-root", str(tmp_path)]) == 1


def test_prepare_evaluate_report_round_trip(tmp_path, capsys):
    specs = [
        CorpusSpec("cli_sep", n_bonafide=4, n_spoof=4, seed=21),
        CorpusSpec("cli_mix", n_bonafide=3, n_spoof=3,
                   separability="overlapping", seed=22),
    ]
    data_root = tmp_path / "data"
    for spec in specs:
        generate_corpus(spec, data_root)
    registry_path = tmp_path / "registry.yaml"
    registry_path.write_text(registry_yaml_for(specs))

    assert cli(["prepare", "all", "--data-root", str(data_root),
                "--registry", str(registry_path)]) == 0
    out = capsys.readouterr().out
    assert "cli_sep: 8 entries" in out
    assert "-> ok" in out

    results_dir = tmp_path / "results"
    config_path = tmp_path / "run.yaml"
    config_path.write_text(config_text(data_root, registry_path, results_dir))
    assert cli(["evaluate", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    assert "group all" in out

    latex_before = (results_dir / "table.tex").read_bytes()
    results_before = (results_dir / "results.json").read_bytes()
    assert cli(["report", "--run", str(results_dir)]) == 0
    assert (results_dir / "table.tex").read_bytes() == latex_before
    assert (results_dir / "results.json").read_bytes() == results_before


def test_prepare_reports_missing_source(tmp_path, capsys):
    spec = CorpusSpec("halfbaked", n_bonafide=2, n_spoof=2, seed=23)
    data_root = tmp_path / "data"
    generate_corpus(spec, data_root)
    (data_root / "halfbaked" / "labels.csv").unlink()
    registry_path = tmp_path / "registry.yaml"
    registry_path.write_text(registry_yaml_for([spec]))
    assert cli(["prepare", "all", "--data-root", str(data_root),
                "--registry", str(registry_path)]) == 1
    err = capsys.readouterr().err
    assert "halfbaked" in err and "labels.csv" in err


def test_fetch_without_sources_prints_license_note(tmp_path, capsys):
    assert cli(["fetch", "wavefake", "--data-root", str(tmp_path / "data")]) == 0
    out = capsys.readouterr().out
    assert "no fetch sources declared" in out


def test_fetch_checksum_failure_exits_nonzero(tmp_path, capsys):
    archive = tmp_path / "corpus.zip"
    with zipfile.ZipFile(archive, "w") as bundle:
        bundle.writestr("a.txt", "payload")
    bad_checksum = "0" * 64
    registry_path = tmp_path / "registry.yaml"
    registry_path.write_text(
        f"""\
- id: fetchme
  display_name: FetchMe
  category: real_plus_fake
  in_the_wild: false
  perturbation: false
  languages: [en]
  accent: false
  vocal_sounds: false
  expressivity: false
  uses_vocoder: false
  uses_neural_codec: false
  generative_method: na
  adapter_id: csv_labeled
  fetch:
    sources:
      - url: {archive.as_uri()}
        checksum: "{bad_checksum}"
        unpack: zip
    license_note: test
"""
    )
    assert cli(["fetch", "fetchme", "--data-root", str(tmp_path / "data"),
                "--registry", str(registry_path)]) == 1
    assert "FAILED" in capsys.readouterr().err

    good = hashlib.sha256(archive.read_bytes()).hexdigest()
    registry_path.write_text(registry_path.read_text().replace(bad_checksum, good))
    assert cli(["fetch", "fetchme", "--data-root", str(tmp_path / "data"),
                "--registry", str(registry_path)]) == 0
    assert (tmp_path / "data" / "fetchme" / "a.txt").read_text() == "payload"
