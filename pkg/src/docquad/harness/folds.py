"""k-fold round structure: in round ``r`` bin ``r`` is the test bin and bin
``(r + 1) % k`` the validation bin; the remaining bins train."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..dataset_io import read_json, atomic_write
from ..exceptions import DataError, MalformedFile, TooFewItems

PARTITIONS = ("train", "val", "test")


@dataclass(frozen=True)
class Round:
    round: int
    test_bin: int
    val_bin: int
    train_bins: tuple


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    bins: tuple  # tuple of tuples of ids
    rounds: tuple

    @property
    def assignment(self):
        return {item_id: b for b, members in enumerate(self.bins) for item_id in members}

    def partition(self, bin_index, round_index):
        rnd = self.rounds[round_index]
        if bin_index == rnd.test_bin:
            return "test"
        if bin_index == rnd.val_bin:
            return "val"
        return "train"

    def members(self, round_index, partition):
        """Ids in ``partition`` during round ``round_index``, in bin order."""
        return [
            item_id
            for b, ids in enumerate(self.bins)
            if self.partition(b, round_index) == partition
            for item_id in ids
        ]

    def to_dict(self):
        return {
            "k": self.k,
            "seed": self.seed,
            "assignment": self.assignment,
            "bins": [list(b) for b in self.bins],
            "rounds": [
                {"round": r.round, "test_bin": r.test_bin, "val_bin": r.val_bin, "train_bins": list(r.train_bins)}
                for r in self.rounds
            ],
        }


def _rounds(k):
    return tuple(
        Round(r, r, (r + 1) % k, tuple(b for b in range(k) if b not in (r, (r + 1) % k)))
        for r in range(k)
    )


def make_folds(ids, k=10, seed=0):
    """Shuffle ``ids`` with ``seed`` and slice them into ``k`` contiguous bins.

    The first ``len(ids) % k`` bins hold one extra item.

    Raises:
        TooFewItems: if there are fewer ids than bins.
    """
    ids = list(ids)
    k = int(k)
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if len(ids) < k:
        raise TooFewItems(f"{len(ids)} items cannot fill {k} bins")
    if len(set(ids)) != len(ids):
        raise DataError("fold ids must be unique")
    order = np.random.Generator(np.random.PCG64(int(seed))).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    base, extra = divmod(len(ids), k)
    bins, start = [], 0
    for b in range(k):
        size = base + (1 if b < extra else 0)
        bins.append(tuple(shuffled[start:start + size]))
        start += size
    return FoldPlan(k, int(seed), tuple(bins), _rounds(k))


def fold_plan_from_dict(doc):
    try:
        k = int(doc["k"])
        bins = tuple(tuple(str(i) for i in b) for b in doc["bins"])
        seed = int(doc.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"bad fold plan ({exc})") from exc
    if len(bins) != k:
        raise MalformedFile(f"fold plan declares k={k} but has {len(bins)} bins")
    return FoldPlan(k, seed, bins, _rounds(k))


def save_fold_plan(plan, path):
    atomic_write(path, json.dumps(plan.to_dict(), indent=2) + "\n")


def load_fold_plan(path):
    return fold_plan_from_dict(read_json(path))
