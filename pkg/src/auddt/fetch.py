"""Declarative dataset fetching: download, checksum-verify, unpack.

Verification fails closed: bytes that do not match the declared sha256 are
discarded and nothing becomes visible. Unpacking happens in a staging
directory that is atomically renamed into place, so a partially fetched
dataset never appears under the data root.
"""

from __future__ import annotations

import hashlib
import shutil
import tarfile
import tempfile
import urllib.error
import urllib.request
import zipfile
from pathlib import Path, PurePosixPath
from typing import Union

from .errors import ChecksumMismatchError, FetchError
from .registry import DatasetDescriptor, FetchSource

_CHUNK = 1 << 16


def _download(url: str, target: Path) -> str:
    digest = hashlib.sha256()
    try:
        with urllib.request.urlopen(url) as response, target.open("wb") as sink:
            while True:
                chunk = response.read(_CHUNK)
                if not chunk:
                    break
                digest.update(chunk)
                sink.write(chunk)
    except (urllib.error.URLError, OSError) as exc:
        raise FetchError(f"download of {url} failed: {exc}") from exc
    return digest.hexdigest()


def _member_is_safe(name: str) -> bool:
    path = PurePosixPath(name)
    return not path.is_absolute() and ".." not in path.parts


def _unpack(archive: Path, mode: str, into: Path) -> None:
    if mode == "zip":
        with zipfile.ZipFile(archive) as bundle:
            for name in bundle.namelist():
                if not _member_is_safe(name):
                    raise FetchError(f"archive member escapes target: {name!r}")
            bundle.extractall(into)
    elif mode == "tar":
        with tarfile.open(archive) as bundle:
            for member in bundle.getmembers():
                if not _member_is_safe(member.name) or member.islnk() or member.issym():
                    raise FetchError(f"archive member escapes target: {member.name!r}")
            bundle.extractall(into)
    archive.unlink()


def fetch_source(source: FetchSource, into: Path) -> None:
    filename = PurePosixPath(source.url.rsplit("/", 1)[-1]).name or "payload.bin"
    target = into / filename
    actual = _download(source.url, target)
    if actual.lower() != source.checksum.lower():
        target.unlink()
        raise ChecksumMismatchError(
            f"{source.url}: checksum {actual} does not match declared {source.checksum}"
        )
    if source.unpack != "none":
        _unpack(target, source.unpack, into)


def fetch_dataset(descriptor: DatasetDescriptor, data_root: Union[str, Path]) -> Path:
    """Fetch every declared source for one dataset into data_root/<id>.

    Returns the dataset directory. A dataset with no declared sources raises
    FetchError (nothing to do); an already-present directory is left alone.
    """
    data_root = Path(data_root)
    data_root.mkdir(parents=True, exist_ok=True)
    destination = data_root / descriptor.id
    if destination.exists():
        return destination
    if not descriptor.fetch.sources:
        raise FetchError(
            f"{descriptor.id}: no fetch sources declared; {descriptor.fetch.license_note}"
        )
    staging = Path(tempfile.mkdtemp(dir=data_root, prefix=f".fetch-{descriptor.id}-"))
    try:
        for source in descriptor.fetch.sources:
            fetch_source(source, staging)
        staging.replace(destination)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return destination
