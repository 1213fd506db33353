"""Record types shared by the corpus I/O and the synthesis pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from qesynth.align import TagSequence

ROUTES = ("nmt", "mlm")
SCORING_MODES = ("hter", "bad_fraction")


@dataclass(frozen=True)
class QEExample:
    source: tuple[str, ...]
    hypothesis: tuple[str, ...]
    pseudo_post_edit: tuple[str, ...]
    tags: TagSequence
    sentence_score: float
    route: str = "nmt"

    def __post_init__(self):
        for name in ("source", "hypothesis", "pseudo_post_edit"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.tags) != len(self.hypothesis):
            raise ValueError(
                f"{len(self.tags)} word tags for {len(self.hypothesis)} hypothesis tokens"
            )
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")


@dataclass
class QEDataset:
    records: list[QEExample] = field(default_factory=list)
    provenance: str = ""
    scoring: str = "hter"
    # free-form generation settings carried into the provenance sidecar
    seed: Optional[int] = None
    config: Optional[dict] = None
    # indices of input records dropped under a skip-and-log policy
    rejected: list[int] = field(default_factory=list, compare=False)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]
