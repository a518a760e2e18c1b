"""Dataset manifests, eye-coordinate sidecars and synthetic dataset writing.

A manifest is a CSV file whose first line is ``# fbface-manifest v1``
followed by the header ``image_id,subject_id,path,partition``.  Paths are
relative to the manifest's directory.  Eye coordinates live in a sidecar
CSV (``eyes.csv`` next to the manifest unless given) with header
``image_id,left_x,left_y,right_x,right_y``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

from .face import EyeCoordinates, mean_eyes
from .pgm import read_pgm, write_pgm
from . import synth

MANIFEST_MAGIC = "# fbface-manifest v1"
MANIFEST_HEADER = ("image_id", "subject_id", "path", "partition")
EYES_HEADER = ("image_id", "left_x", "left_y", "right_x", "right_y")
PARTITIONS = ("gallery", "probe_fb", "probe_dup1", "probe_dup2", "probe_fc", "custom")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Entry:
    image_id: str
    subject_id: str
    path: Path
    partition: str
    eyes: EyeCoordinates | None
    eyes_filled: bool = False


@dataclass
class DatasetManifest:
    root: Path
    entries: list
    flagged: list = field(default_factory=list)

    def partition(self, *names) -> list:
        return [e for e in self.entries if e.partition in names]

    @property
    def gallery(self) -> list:
        return self.partition("gallery")

    @property
    def probes(self) -> list:
        return [e for e in self.entries if e.partition != "gallery"]


def read_eyes(path) -> dict:
    path = Path(path)
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != EYES_HEADER:
            raise ManifestError(f"{path}:1: expected header {','.join(EYES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != len(EYES_HEADER):
                raise ManifestError(f"{path}:{lineno}: expected {len(EYES_HEADER)} fields, got {len(row)}")
            image_id = row[0].strip()
            if all(v.strip() == "" for v in row[1:]):
                continue
            try:
                lx, ly, rx, ry = (float(v) for v in row[1:])
                out[image_id] = EyeCoordinates(left=(lx, ly), right=(rx, ry))
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: bad eye coordinates ({exc})") from exc
    return out


def write_eyes(path, eyes: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EYES_HEADER)
        for image_id, e in eyes.items():
            w.writerow([image_id, repr(e.left[0]), repr(e.left[1]), repr(e.right[0]), repr(e.right[1])])


def ingest(manifest_path, eyes_path=None, check_images: bool = True) -> DatasetManifest:
    """Load and validate a manifest.

    Entries without eye coordinates are flagged and given the mean of the
    located entries.

    Raises
    ------
    ManifestError
        On an empty manifest, malformed rows, duplicate ids, unknown
        partitions or unreadable images; the message names the line.
    """
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    eyes_path = root / "eyes.csv" if eyes_path is None else Path(eyes_path)
    with open(manifest_path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MANIFEST_MAGIC:
        raise ManifestError(f"{manifest_path}:1: expected '{MANIFEST_MAGIC}'")
    if len(lines) < 2 or tuple(h.strip() for h in lines[1].split(",")) != MANIFEST_HEADER:
        raise ManifestError(f"{manifest_path}:2: expected header {','.join(MANIFEST_HEADER)}")
    eyes = read_eyes(eyes_path) if eyes_path.exists() else {}

    entries = []
    seen = {}
    for lineno, row in enumerate(csv.reader(lines[2:]), start=3):
        if not row or not "".join(row).strip():
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise ManifestError(f"{manifest_path}:{lineno}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
        image_id, subject_id, rel, partition = (v.strip() for v in row)
        if not image_id or not subject_id or not rel:
            raise ManifestError(f"{manifest_path}:{lineno}: empty field")
        if image_id in seen:
            raise ManifestError(f"{manifest_path}:{lineno}: duplicate image_id {image_id!r} (first on line {seen[image_id]})")
        if partition not in PARTITIONS:
            raise ManifestError(f"{manifest_path}:{lineno}: unknown partition {partition!r}")
        seen[image_id] = lineno
        path = root / rel
        if check_images:
            try:
                img = read_pgm(path)
            except (OSError, ValueError) as exc:
                raise ManifestError(f"{manifest_path}:{lineno}: unreadable image {rel} ({exc})") from exc
            e = eyes.get(image_id)
            if e is not None and not e.inside(img.shape[1], img.shape[0]):
                raise ManifestError(f"{manifest_path}:{lineno}: eye coordinates outside image {rel}")
        entries.append(Entry(image_id, subject_id, path, partition, eyes.get(image_id)))
    if not entries:
        raise ManifestError(f"{manifest_path}: no entries")

    located = [e.eyes for e in entries if e.eyes is not None]
    flagged = [e.image_id for e in entries if e.eyes is None]
    if flagged:
        if not located:
            raise ManifestError(f"{manifest_path}: no entry has eye coordinates")
        fill = mean_eyes(located)
        entries = [replace(e, eyes=fill, eyes_filled=True) if e.eyes is None else e for e in entries]
    return DatasetManifest(root=root, entries=entries, flagged=flagged)


def write_manifest(path, rows) -> None:
    """``rows``: iterable of ``(image_id, subject_id, relative_path, partition)``."""
    with open(path, "w", newline="") as fh:
        fh.write(MANIFEST_MAGIC + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for row in rows:
            w.writerow(row)


def synth_dataset(out_dir, subjects: int, images_per_subject: int, noise_sd: float, seed: int,
                  options: synth.SynthOptions = synth.SynthOptions()) -> DatasetManifest:
    """Write a synthetic dataset (PGM images, manifest, eye sidecar) and ingest it.

    The first image of each subject goes to the gallery, the rest to ``probe_fb``.
    """
    out = Path(out_dir)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    rows = []
    eyes = {}
    for s, k, image, e in synth.generate(subjects, images_per_subject, noise_sd, seed, options):
        image_id = f"s{s:04d}_{k:02d}"
        rel = f"images/{image_id}.pgm"
        write_pgm(out / rel, image)
        rows.append((image_id, f"s{s:04d}", rel, "gallery" if k == 0 else "probe_fb"))
        eyes[image_id] = e
    write_manifest(out / "manifest.csv", rows)
    write_eyes(out / "eyes.csv", eyes)
    return ingest(out / "manifest.csv")
