"""Checksummed snapshot storage for context/lattice pairs plus the ledger.

Layout under the data directory:

    snapshots/ctx-<seq>.json       context snapshot
    snapshots/lat-<seq>.json       lattice snapshot
    latest.json                    pointer + SHA-256 checksums
    ledger.jsonl                   append-only feedback ledger

The latest-pointer is written last via an atomic rename, so readers either
see the previous complete snapshot or the new one, never a torn state.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .context import FuzzyContext
from .errors import SnapshotError
from .feedback import FeedbackLedger
from .lattice import ConceptLattice


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class SnapshotStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.snap_dir = self.data_dir / "snapshots"
        self.latest_path = self.data_dir / "latest.json"
        self.ledger_path = self.data_dir / "ledger.jsonl"
        self.taxonomy_path = self.data_dir / "taxonomy.json"

    def store_taxonomy(self, source: str | Path) -> None:
        """Keep the taxonomy next to the snapshots so later boots and raw
        ticket queries see the same extraction rules the build used."""
        self.ensure_dirs()
        text = Path(source).read_text(encoding="utf-8")
        self.taxonomy_path.write_text(text, encoding="utf-8")

    def ensure_dirs(self) -> None:
        self.snap_dir.mkdir(parents=True, exist_ok=True)

    def has_snapshot(self) -> bool:
        return self.latest_path.exists()

    def save(self, ctx: FuzzyContext, lattice: ConceptLattice) -> dict:
        """Write a new snapshot generation and atomically repoint latest."""
        self.ensure_dirs()
        seq = self._next_seq()
        ctx_file = self.snap_dir / f"ctx-{seq:06d}.json"
        lat_file = self.snap_dir / f"lat-{seq:06d}.json"
        ctx.to_json(ctx_file)
        lattice.to_json(lat_file)
        pointer = {
            "version": 1,
            "seq": seq,
            "context": ctx_file.name,
            "lattice": lat_file.name,
            "sha256": {ctx_file.name: _sha256(ctx_file), lat_file.name: _sha256(lat_file)},
        }
        tmp = self.latest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(pointer, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self.latest_path)
        return pointer

    def load(self) -> tuple[FuzzyContext, ConceptLattice]:
        """Load and verify the latest snapshot pair."""
        if not self.latest_path.exists():
            raise SnapshotError(f"no snapshot in {self.data_dir} (missing {self.latest_path.name})")
        try:
            pointer = json.loads(self.latest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"corrupt snapshot pointer {self.latest_path}: {exc}") from exc

        files = {}
        for role in ("context", "lattice"):
            name = pointer.get(role)
            file = self.snap_dir / str(name)
            if not file.exists():
                raise SnapshotError(f"snapshot file missing: {file}")
            digest = _sha256(file)
            expected = pointer.get("sha256", {}).get(name)
            if digest != expected:
                raise SnapshotError(f"checksum mismatch for {file}: {digest} != {expected}")
            files[role] = file

        try:
            ctx = FuzzyContext.load(files["context"])
        except (ValueError, KeyError) as exc:
            raise SnapshotError(f"corrupt context snapshot {files['context']}: {exc}") from exc
        try:
            lattice = ConceptLattice.load(files["lattice"])
        except (ValueError, KeyError) as exc:
            raise SnapshotError(f"corrupt lattice snapshot {files['lattice']}: {exc}") from exc
        if lattice.context_hash != ctx.content_hash():
            raise SnapshotError(
                f"lattice {files['lattice'].name} does not match context {files['context'].name}"
            )
        return ctx, lattice

    def load_ledger(self) -> FeedbackLedger:
        return FeedbackLedger.load(self.ledger_path)

    def checksums(self) -> dict[str, str]:
        """Checksums of the current snapshot pair, for replay comparisons."""
        if not self.latest_path.exists():
            raise SnapshotError(f"no snapshot in {self.data_dir}")
        pointer = json.loads(self.latest_path.read_text(encoding="utf-8"))
        return dict(pointer.get("sha256", {}))

    def _next_seq(self) -> int:
        if not self.latest_path.exists():
            return 1
        try:
            pointer = json.loads(self.latest_path.read_text(encoding="utf-8"))
            return int(pointer.get("seq", 0)) + 1
        except (json.JSONDecodeError, ValueError):
            return 1
