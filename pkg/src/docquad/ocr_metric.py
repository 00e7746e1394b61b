"""OCR fidelity score built on a length-clamped Levenshtein distance.

For ground-truth texts ``GT`` and index-aligned predictions ``PD``::

    ldist = sum_i min(lev(GT[i], PD[i]), len(GT[i]))
    score = 1 - ldist / sum_i len(GT[i])

Lengths and edits count Unicode code points. With no ground-truth text at
all the score is 1.0, since clamping forces ``ldist`` to 0.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .exceptions import AlignmentError, InvalidParameter
from .geometry import box_iou


@dataclass(frozen=True)
class Entity:
    """A labelled document field with its text and axis-aligned box ``(x0, y0, x1, y1)``."""

    name: str
    text: str
    box: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        box = tuple(float(v) for v in self.box)
        if len(box) != 4 or box[2] < box[0] or box[3] < box[1]:
            raise InvalidParameter(f"entity {self.name!r} has a malformed box {self.box!r}")
        object.__setattr__(self, "box", box)


@dataclass(frozen=True)
class NormalizeConfig:
    collapse_whitespace: bool = True
    casefold: bool = False
    compose: bool = True


def normalize_text(text, cfg=NormalizeConfig()):
    if cfg.compose:
        text = unicodedata.normalize("NFC", text)
    if cfg.collapse_whitespace:
        text = " ".join(text.split())
    if cfg.casefold:
        text = text.casefold()
    return text


def levenshtein(a, b):
    """Minimum number of code-point insertions, deletions and substitutions."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def clamped_entity_distance(gt, pd):
    """``min(levenshtein(gt, pd), len(gt))``."""
    return min(levenshtein(gt, pd), len(gt))


def _texts(items):
    return [item.text if isinstance(item, Entity) else item for item in items]


def ldist(gt, pd):
    """Sum of clamped per-entity distances.

    Raises:
        AlignmentError: if the two sequences differ in length.
    """
    gt, pd = _texts(gt), list(pd)
    if len(gt) != len(pd):
        raise AlignmentError(f"{len(gt)} ground-truth texts but {len(pd)} predictions")
    return sum(clamped_entity_distance(g, p) for g, p in zip(gt, pd))


def score_breakdown(gt, pd, norm=NormalizeConfig()):
    """Score plus per-entity ``(gt_len, distance)`` after normalisation.

    ``gt`` may hold :class:`Entity` objects or plain strings.
    """
    names = [e.name if isinstance(e, Entity) else str(i) for i, e in enumerate(gt)]
    gt_texts = [normalize_text(t, norm) for t in _texts(gt)]
    pd_texts = [normalize_text(t, norm) for t in pd]
    if len(gt_texts) != len(pd_texts):
        raise AlignmentError(f"{len(gt_texts)} ground-truth texts but {len(pd_texts)} predictions")
    rows = []
    for name, g, p in zip(names, gt_texts, pd_texts):
        rows.append({"name": name, "gt_len": len(g), "distance": clamped_entity_distance(g, p)})
    total = sum(r["gt_len"] for r in rows)
    dist = sum(r["distance"] for r in rows)
    score = 1.0 if total == 0 else 1.0 - dist / total
    return score, rows


def ocr_score(gt, pd, norm=NormalizeConfig()):
    """OCR fidelity in [0, 1]; 1 means every normalised text matches exactly."""
    return score_breakdown(gt, pd, norm)[0]


def _name_key(name):
    return name.strip().casefold()


def align_by_name(gt, pred):
    """Texts of a name-keyed prediction, in entity order (missing names give "").

    Names match case-insensitively after trimming; unknown keys are ignored.
    """
    lookup = {}
    for name, text in pred.items():
        lookup.setdefault(_name_key(name), text)
    return [lookup.get(_name_key(e.name), "") for e in gt]


def _pred_box_and_text(item):
    if isinstance(item, dict):
        return tuple(float(v) for v in item["box"]), item["text"]
    box, text = item
    return tuple(float(v) for v in box), text


def align_by_box_iou(gt, pred):
    """Assign box-listed predictions to entities by highest box IoU.

    Each predicted box goes to the entity it overlaps most (IoU > 0); ties go
    to the entity that comes first in reading order (top, then left). An
    entity's text is its assigned fragments sorted by (top, left) and joined
    with single spaces.
    """
    entities = list(gt)
    reading = sorted(range(len(entities)), key=lambda k: (entities[k].box[1], entities[k].box[0], k))
    assigned = [[] for _ in entities]
    for order, item in enumerate(pred):
        box, text = _pred_box_and_text(item)
        best, best_iou = None, 0.0
        for k in reading:
            iou = box_iou(box, entities[k].box)
            if iou > best_iou:
                best, best_iou = k, iou
        if best is not None:
            assigned[best].append((box[1], box[0], order, text))
    return [" ".join(t for *_, t in sorted(frags)) for frags in assigned]
