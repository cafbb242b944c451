"""Report emission: JSON summaries plus CSV histograms."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .contamination import ContaminationReport, RephraseReport
from .scoring import ScoreReport
from .stats import DatasetStats


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _histogram_csv(mapping: dict, key_header: str) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([key_header, "count"])
    for key in sorted(mapping, key=lambda k: float(k)):
        writer.writerow([key, mapping[key]])
    return buffer.getvalue()


def write_stats_report(stats: DatasetStats, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    data = stats.to_dict()
    written = [out / "stats.json"]
    _write_text(out / "stats.json", _dump_json(data))
    for name, key_header in (
        ("turn_histogram", "exchanges"),
        ("instruction_length_histogram", "bucket_words"),
        ("response_length_histogram", "bucket_words"),
    ):
        path = out / f"{name}.csv"
        _write_text(path, _histogram_csv(data[name], key_header))
        written.append(path)
    return written


def write_contamination_report(report: ContaminationReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    _write_text(out / "contamination.json", _dump_json(report.to_dict()))
    _write_text(
        out / "similarity_histogram.csv",
        _histogram_csv(report.histogram, "bucket_low"),
    )
    return [out / "contamination.json", out / "similarity_histogram.csv"]


def write_rephrase_report(report: RephraseReport, out_dir: str | Path) -> Path:
    out = Path(out_dir) / f"rephrase_{report.test_set_name}.json"
    _write_text(out, _dump_json(report.to_dict()))
    return out


def write_score_report(report: ScoreReport, out_dir: str | Path) -> Path:
    out = Path(out_dir) / "scores.json"
    _write_text(out, _dump_json(report.to_dict()))
    return out
