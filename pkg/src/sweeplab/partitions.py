"""Marked partitions of ``{1, ..., n}``: canonical form, enumeration, integer codes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class MarkedPartition:
    """A partition of ``{1..n}`` with at most one marked block.

    Blocks are kept canonical (sorted tuples, ordered by least element), so
    ``==`` and hashing are canonical equality. ``marked`` indexes ``blocks``
    or is ``None``.
    """

    n: int
    blocks: tuple
    marked: Optional[int] = None

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        if self.marked is not None and not 0 <= self.marked < len(self.blocks):
            raise ValueError(f"marked index {self.marked} names no block")
        marked_block = None if self.marked is None else tuple(sorted(self.blocks[self.marked]))
        seen = [e for b in blocks for e in b]
        if any(len(b) == 0 for b in blocks) or sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks do not partition 1..{self.n}: {self.blocks!r}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "marked", None if marked_block is None else blocks.index(marked_block))

    @classmethod
    def from_labels(cls, labels: Sequence, marked_label=None) -> "MarkedPartition":
        """Group elements ``1..n`` by equal label; the block carrying ``marked_label`` is marked."""
        groups: dict = {}
        for i, lab in enumerate(labels, start=1):
            groups.setdefault(lab, []).append(i)
        blocks = list(groups.values())
        marked = None
        if marked_label is not None and marked_label in groups:
            marked = list(groups).index(marked_label)
        return cls(len(labels), tuple(tuple(b) for b in blocks), marked)

    @property
    def marked_block(self) -> Optional[tuple]:
        return None if self.marked is None else self.blocks[self.marked]

    def labels(self) -> np.ndarray:
        """Restricted-growth labels: element ``i`` gets the index of its block."""
        out = np.empty(self.n, dtype=np.int64)
        for b, block in enumerate(self.blocks):
            for e in block:
                out[e - 1] = b
        return out

    def code(self) -> int:
        return int(encode_partitions(self.labels()[None, :], self._marked_mask()[None, :])[0])

    def _marked_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        if self.marked is not None:
            mask[np.asarray(self.blocks[self.marked]) - 1] = True
        return mask

    @classmethod
    def from_code(cls, code: int, n: int) -> "MarkedPartition":
        base = n + 1
        labels = []
        for _ in range(n):
            code, d = divmod(code, base)
            labels.append(d)
        mark = code
        return cls.from_labels(labels, None if mark == 0 else mark - 1)

    def __str__(self):
        parts = []
        for b, block in enumerate(self.blocks):
            s = "{" + ",".join(map(str, block)) + "}"
            parts.append(s + "*" if b == self.marked else s)
        return " ".join(parts)


def encode_partitions(labels: np.ndarray, in_marked: np.ndarray) -> np.ndarray:
    """Integer codes of canonical marked partitions, one per row.

    ``labels[d, i]`` is any label of element ``i+1`` in draw ``d``; equal labels
    mean the same block. ``in_marked[d, i]`` flags membership of the marked
    block. Rows that differ only by relabeling get equal codes.
    """
    labels = np.asarray(labels)
    in_marked = np.asarray(in_marked, dtype=bool)
    draws, n = labels.shape
    rgs = np.zeros((draws, n), dtype=np.int64)
    nxt = np.zeros(draws, dtype=np.int64)
    for j in range(n):
        assigned = np.zeros(draws, dtype=bool)
        for i in range(j):
            hit = ~assigned & (labels[:, i] == labels[:, j])
            rgs[hit, j] = rgs[hit, i]
            assigned |= hit
        rgs[~assigned, j] = nxt[~assigned]
        nxt[~assigned] += 1
    base = n + 1
    code = np.zeros(draws, dtype=np.int64)
    weight = 1
    for j in range(n):
        code += rgs[:, j] * weight
        weight *= base
    first_marked = np.where(in_marked.any(axis=1), np.argmax(in_marked, axis=1), -1)
    mark = np.where(first_marked >= 0, rgs[np.arange(draws), np.maximum(first_marked, 0)] + 1, 0)
    return code + mark * weight


def _set_partitions(elements: list) -> Iterator[list]:
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def enumerate_marked_partitions(n: int) -> Iterator[MarkedPartition]:
    """Every marked partition of ``{1..n}`` once (unmarked plus each block marked)."""
    for part in _set_partitions(list(range(1, n + 1))):
        blocks = tuple(tuple(b) for b in part)
        yield MarkedPartition(n, blocks, None)
        for m in range(len(blocks)):
            yield MarkedPartition(n, blocks, m)


def code_frequencies(codes: np.ndarray) -> dict:
    """Occurrence count of each distinct code."""
    values, counts = np.unique(np.asarray(codes, dtype=np.int64), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
