"""Training dataset layout and manifest.

  out_dir/
    manifest.json
    pairs/<id>.input.png|.input.pfm|.input.a.png   five-channel input frame
    pairs/<id>.target.png                          ground-truth color target
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import DatasetError

MANIFEST_VERSION = 1
MODES = ("filtered", "leaky")


@dataclass(frozen=True)
class DatasetManifest:
    mode: str
    ids: tuple
    params: dict
    seed: int
    version: int = MANIFEST_VERSION

    def __post_init__(self):
        if self.version != MANIFEST_VERSION:
            raise DatasetError(f"unsupported manifest version {self.version}")
        if self.mode not in MODES:
            raise DatasetError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(set(self.ids)) != len(self.ids):
            raise DatasetError("pair ids must be unique")
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))


def manifest_path(root) -> Path:
    return Path(root) / "manifest.json"


def pair_paths(root, pair_id: str) -> dict:
    base = Path(root) / "pairs" / str(pair_id)
    return {"input": str(base) + ".input", "target": str(base) + ".target.png"}


def save_manifest(root, manifest: DatasetManifest) -> None:
    doc = {
        "version": manifest.version,
        "mode": manifest.mode,
        "ids": list(manifest.ids),
        "params": manifest.params,
        "seed": manifest.seed,
    }
    with open(manifest_path(root), "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest(root) -> DatasetManifest:
    path = manifest_path(root)
    if not path.exists():
        raise DatasetError(f"no manifest at {path}")
    with open(path) as f:
        doc = json.load(f)
    try:
        return DatasetManifest(
            mode=doc["mode"],
            ids=tuple(doc["ids"]),
            params=doc["params"],
            seed=int(doc["seed"]),
            version=int(doc["version"]),
        )
    except KeyError as e:
        raise DatasetError(f"manifest missing field {e}") from None
