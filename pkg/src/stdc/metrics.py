"""Equal error rate, accuracy and DET points from score records."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import BONA_FIDE, SPOOF, ScoreRecord
from .errors import BadHeader, BadLabel, SingleClassScores

LABEL_NAMES = {BONA_FIDE: "bona_fide", SPOOF: "spoof"}
LABEL_IDS = {v: k for k, v in LABEL_NAMES.items()}


@dataclass(frozen=True)
class EvalReport:
    eer: float
    threshold_at_eer: float
    accuracy: float
    det_points: list  # (far, frr) pairs, thresholds ascending
    n_bona: int
    n_spoof: int


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, ascending.

    With a single distinct score the score itself is the only candidate.
    """
    distinct = np.unique(scores)
    if distinct.size == 1:
        return distinct
    return distinct[:-1] + (distinct[1:] - distinct[:-1]) / 2.0


def error_counts(bona: np.ndarray, spoof: np.ndarray, thresholds: np.ndarray):
    """(false accepts, false rejects) at each threshold.

    A spoof above the threshold is accepted; a bona fide at or below it is
    rejected.
    """
    fa = spoof.size - np.searchsorted(np.sort(spoof), thresholds, side="right")
    fr = np.searchsorted(np.sort(bona), thresholds, side="right")
    return fa, fr


def compute_eer(records: Sequence[ScoreRecord]) -> EvalReport:
    scores = np.array([r.score for r in records], dtype=np.float64)
    labels = np.array([r.label for r in records])
    bona = scores[labels == BONA_FIDE]
    spoof = scores[labels == SPOOF]
    if bona.size == 0 or spoof.size == 0:
        raise SingleClassScores("EER needs at least one bona fide and one spoof score")
    n_b, n_s = bona.size, spoof.size

    thresholds = candidate_thresholds(scores)
    # count at the lower score of each gap: a rounded midpoint could land on
    # the upper score when the two are adjacent floats
    distinct = np.unique(scores)
    cuts = distinct[:-1] if distinct.size > 1 else distinct
    fa, fr = error_counts(bona, spoof, cuts)
    # |FAR - FRR| compared on a common denominator so ties are exact
    gap = np.abs(fa * n_b - fr * n_s)
    best = int(np.argmin(gap))  # first hit is the lowest threshold
    # (FAR + FRR) / 2 as one integer ratio so the result is correctly rounded
    eer = int(fa[best] * n_b + fr[best] * n_s) / (2 * n_b * n_s)
    correct = int((n_b - fr[best]) + (n_s - fa[best]))

    det = [(1.0, 0.0)]
    det += [(a / n_s, r / n_b) for a, r in zip(fa, fr)]
    det.append((0.0, 1.0))
    return EvalReport(
        eer=float(eer),
        threshold_at_eer=float(thresholds[best]),
        accuracy=float(correct / (n_b + n_s)),
        det_points=det,
        n_bona=n_b,
        n_spoof=n_s,
    )


# ---------------------------------------------------------------- files


def format_scores(records: Sequence[ScoreRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["utt_id", "score", "label"])
    for r in records:
        w.writerow([r.utt_id, repr(float(r.score)), LABEL_NAMES[r.label]])
    return out.getvalue()


def write_scores(path, records: Sequence[ScoreRecord]) -> None:
    Path(path).write_text(format_scores(records), encoding="utf-8")


def read_scores(path) -> list[ScoreRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header != ["utt_id", "score", "label"]:
            raise BadHeader(f"unexpected score file header {header}")
        out = []
        for n, row in enumerate(rows, start=2):
            if not row:
                continue
            label = row[2].strip().lower()
            if label not in LABEL_IDS:
                raise BadLabel(f"row {n}: unknown label {row[2]!r}")
            out.append(ScoreRecord(row[0], float(row[1]), LABEL_IDS[label]))
        return out


def format_report(report: EvalReport, title: str = "") -> str:
    lines = [f"# {title}"] if title else []
    lines += [
        f"bona_fide = {report.n_bona}",
        f"spoof = {report.n_spoof}",
        f"eer = {report.eer:.6f}",
        f"threshold = {report.threshold_at_eer:.9g}",
        f"accuracy = {report.accuracy:.6f}",
    ]
    return "\n".join(lines) + "\n"


def format_det(report: EvalReport) -> str:
    lines = ["far,frr"]
    lines += [f"{far:.9g},{frr:.9g}" for far, frr in report.det_points]
    return "\n".join(lines) + "\n"
