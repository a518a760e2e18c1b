import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fbface import descriptors as desc_io
from fbface.cli import INCOMPLETE_MARKER, OUTPUT_ENV, build_parser, config_from_args, main
from fbface.config import EyeNoise, ExperimentConfig
from fbface.dataset import ingest, synth_dataset
from fbface.experiment import features, preprocess, run_experiment, train, verify
from fbface.svg import roc_svg
from fbface.verification import build_roc, read_roc_csv, roc_from_claims


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    synth_dataset(root, 4, 3, 0.02, 3)
    return root / "manifest.csv"


def test_identical_probes_give_zero_eer(dataset):
    manifest = ingest(dataset)
    config = ExperimentConfig()
    pre = preprocess(manifest, config)
    run = run_experiment(pre.gallery, pre.gallery, config)
    assert build_roc(run).eer() == 0.0


def test_probe_of_unknown_subject_is_excluded(dataset):
    manifest = ingest(dataset)
    pre = preprocess(manifest, ExperimentConfig())
    gallery = [s for s in pre.gallery if s.subject_id != "s0003"]
    run = verify(train(gallery, ExperimentConfig()), pre.probes)
    assert {i for i, _ in run.excluded} == {"s0003_01", "s0003_02"}
    assert all("absent from gallery" in reason for _, reason in run.excluded)


def test_parallel_features_match_serial(dataset):
    pre = preprocess(ingest(dataset), ExperimentConfig())
    a = features(pre.probes, ExperimentConfig(mode="local"))
    b = features(pre.probes, ExperimentConfig(mode="local", workers=4))
    assert np.array_equal(a, b)


def test_fingerprint_tracks_feature_settings_only():
    base = ExperimentConfig()
    assert base.fingerprint() == ExperimentConfig(occlusion="eye_mouth", eye_noise=EyeNoise()).fingerprint()
    assert base.fingerprint() != ExperimentConfig(mode="local").fingerprint()
    pca = ExperimentConfig(classifier="pca_baseline")
    assert pca.as_dict()["fbt"] == "ignored"
    assert pca.fingerprint() == ExperimentConfig(classifier="pca_baseline", mode="local").fingerprint()


def test_config_rejects_unknown_values():
    with pytest.raises(ValueError):
        ExperimentConfig(mode="sideways")
    with pytest.raises(ValueError):
        ExperimentConfig(occlusion="hat")


def test_flags_mirror_config_fields(monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, "/tmp/from-env")
    args = build_parser().parse_args(
        ["run", "m.csv", "--mode", "local", "--fbt-max-order", "10", "--eye-noise", "--eye-noise-seed", "4",
         "--classifier", "pca_baseline", "--pca-seed", "3", "--descriptor-variant", "magnitude_186"]
    )
    config = config_from_args(args)
    assert config.mode == "local" and config.fbt.max_order == 10
    assert config.eye_noise == EyeNoise(seed=4)
    assert config.output_dir == "/tmp/from-env"
    assert config.pca_seed == 3 and config.flatten_variant == "magnitude"
    flags = {a.dest for a in build_parser()._subparsers._group_actions[0].choices["run"]._actions}
    for name in ("mode", "occlusion", "classifier", "descriptor_variant", "output_dir", "workers",
                 "pca_sample_size", "pca_drop_leading", "pca_seed"):
        assert name in flags


def test_descriptor_files_round_trip(tmp_path):
    rows = np.random.default_rng(0).normal(size=(3, 372))
    desc_io.write_binary(tmp_path / "d.f8", rows)
    raw = (tmp_path / "d.f8").read_bytes()
    assert len(raw) == 3 * 372 * 8
    assert np.frombuffer(raw[:8], "<f8")[0] == rows[0, 0]
    np.testing.assert_array_equal(desc_io.read_binary(tmp_path / "d.f8", 372), rows)
    desc_io.write_csv(tmp_path / "d.csv", ["a", "b", "c"], rows, {"mode": "global"})
    assert (tmp_path / "d.csv").read_text().splitlines()[0].startswith("# fbface-descriptors {")
    ids, back, settings = desc_io.read_csv(tmp_path / "d.csv")
    assert ids == ["a", "b", "c"] and settings == {"mode": "global"}
    np.testing.assert_array_equal(back, rows)
    with pytest.raises(ValueError):
        desc_io.read_binary(tmp_path / "d.f8", 371)


def test_svg_is_well_formed():
    rng = np.random.default_rng(0)
    roc = roc_from_claims(rng.normal(size=50), rng.normal(1, 1, 50))
    root = ET.fromstring(roc_svg([("a <b>", roc), ("c", roc)]))
    polylines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(polylines) == 2
    assert len(polylines[0].get("points").split()) == 100


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_run_writes_all_artifacts_and_is_reproducible(dataset, tmp_path, capsys):
    for out in ("a", "b"):
        assert run_cli("run", dataset, "--mode", "local", "--output-dir", tmp_path / out) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "roc.csv").read_bytes() == (b / "roc.csv").read_bytes()
    for name in ("roc.svg", "model.npz", "run_manifest.json", "descriptors/gallery.csv", "descriptors/probes.f8"):
        assert (a / name).exists()
    assert not (a / INCOMPLETE_MARKER).exists()
    record = json.loads((a / "run_manifest.json").read_text())
    assert record["status"] == "complete"
    assert record["config_fingerprint"] == ExperimentConfig(mode="local").fingerprint()
    assert set(record["inputs"]["images"]) == {e.image_id for e in ingest(dataset).entries}
    assert len(read_roc_csv(a / "roc.csv").thresholds) == 100


def test_pca_run_records_ignored_fbt(dataset, tmp_path):
    # a 4-image gallery has only 3 components, so keep 2 of them
    assert run_cli("run", dataset, "--classifier", "pca_baseline", "--pca-drop-leading", 1, "--output-dir", tmp_path) == 0
    record = json.loads((tmp_path / "run_manifest.json").read_text())
    assert record["config"]["fbt"] == "ignored"
    assert record["config"]["pca_drop_leading"] == 1
    assert record["seeds"]["pca"] == 1998


def test_train_then_verify_and_mismatch(dataset, tmp_path, capsys):
    assert run_cli("train", dataset, "--output-dir", tmp_path) == 0
    assert run_cli("verify", dataset, "--model", tmp_path / "model.npz", "--output-dir", tmp_path) == 0
    assert (tmp_path / "roc.csv").exists()
    assert run_cli("verify", dataset, "--model", tmp_path / "model.npz", "--mode", "local", "--output-dir", tmp_path) == 1
    assert "trained with config" in capsys.readouterr().err


def test_failed_run_is_marked_partial(tmp_path):
    (tmp_path / "m.csv").write_text("# fbface-manifest v1\nimage_id,subject_id,path,partition\na,s,none.pgm,gallery\n")
    assert run_cli("run", tmp_path / "m.csv", "--output-dir", tmp_path / "out") == 1
    assert "partial" in (tmp_path / "out" / INCOMPLETE_MARKER).read_text()
    assert json.loads((tmp_path / "out" / "run_manifest.json").read_text())["status"] == "failed"


def test_other_commands(dataset, tmp_path, capsys):
    assert run_cli("ingest-check", dataset) == 0
    assert "gallery=4" in capsys.readouterr().out
    assert run_cli("extract", dataset, "--partition", "gallery", "--output-dir", tmp_path) == 0
    assert desc_io.read_binary(tmp_path / "descriptors_gallery.f8", 372).shape == (4, 372)
    assert run_cli("synth", "--subjects", 2, "--images-per-subject", 1, "--output-dir", tmp_path / "s") == 0
    assert (tmp_path / "s" / "manifest.csv").exists()
    run_cli("run", dataset, "--output-dir", tmp_path / "r")
    assert run_cli("roc-plot", tmp_path / "r" / "roc.csv", "--out", tmp_path / "p.svg") == 0
    ET.parse(tmp_path / "p.svg")
