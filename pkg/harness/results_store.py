"""
ResultsStore - Persists trial rows, aggregates and audition artefacts
Aggregates are computed only from the rows read back from trials.csv
"""

import csv
import json
import math
import os
from datetime import datetime
from enum import Enum
from typing import Dict, Iterable, List, Optional

import numpy as np

from core.audio import FrameCodec, decode, write_latents_csv, write_wav

from .experiment import METRIC_COLUMNS, TRIAL_COLUMNS, ExperimentConfig, Task
from .trials import TrialOutcome

SUMMARY_KEYS = ["task", "method", "psnr_index", "psnr_db"]
TABLE_METRICS = {
    Task.DENOISE: [("SNR", "snr_restored_db"), ("FD", "fd_all")],
    Task.INPAINT: [("All", "fd_all"), ("Inp", "fd_inp"), ("SNR", "snr_restored_db")],
    Task.JOINT: [("All", "fd_all"), ("Inp", "fd_inp"), ("SNR", "snr_restored_db")],
}


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(float(value))
    return str(value)


def parse_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def _write_rows(path: str, header: List[str], rows: Iterable[List[str]]):
    """Write a CSV atomically"""
    tmp_path = path + ".tmp"
    with open(tmp_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp_path, path)


class ResultsStore:
    """Owns the output directory of one grid run"""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def path(self, *parts: str) -> str:
        return os.path.join(self.output_dir, *parts)

    # ------------------------------------------------------------------
    # Per-trial rows
    # ------------------------------------------------------------------

    def write_trials(self, outcomes: List[TrialOutcome]) -> str:
        path = self.path("trials.csv")
        rows = []
        for outcome in outcomes:
            data = outcome.result.model_dump()
            rows.append([format_cell(data[name]) for name in TRIAL_COLUMNS])
        _write_rows(path, TRIAL_COLUMNS, rows)

        _write_rows(self.path("timings.csv"), ["task", "method", "psnr_index", "trial", "wall_time_s"],
                    ([format_cell(o.result.task), format_cell(o.result.method),
                      str(o.result.psnr_index), str(o.result.trial),
                      repr(o.result.wall_time_s)] for o in outcomes))
        print(f"💾 [STORE] {len(rows)} trial rows -> {path}")
        return path

    def read_trials(self) -> List[Dict[str, str]]:
        with open(self.path("trials.csv"), newline="") as handle:
            return list(csv.DictReader(handle))

    # ------------------------------------------------------------------
    # Aggregates
    # ------------------------------------------------------------------

    def summarize(self) -> List[Dict[str, object]]:
        """Group rows by (task, method, PSNR) in first-seen order and write summaries"""
        groups: Dict[tuple, List[Dict[str, str]]] = {}
        for row in self.read_trials():
            groups.setdefault(tuple(row[k] for k in SUMMARY_KEYS), []).append(row)

        summary = []
        for key, rows in groups.items():
            ok_rows = [r for r in rows if r["status"] == "ok"]
            entry: Dict[str, object] = dict(zip(SUMMARY_KEYS, key))
            entry["n_ok"] = len(ok_rows)
            entry["n_failed"] = len(rows) - len(ok_rows)
            for metric in METRIC_COLUMNS:
                values = [v for v in (parse_float(r[metric]) for r in ok_rows) if v is not None]
                entry[f"{metric}_mean"] = float(np.mean(values)) if values else None
                entry[f"{metric}_std"] = float(np.std(values, ddof=1)) if len(values) > 1 else (
                    0.0 if values else None)
                entry[f"{metric}_n"] = len(values)
            summary.append(entry)

        header = SUMMARY_KEYS + ["n_ok", "n_failed"] + [
            f"{metric}_{stat}" for metric in METRIC_COLUMNS for stat in ("mean", "std")]
        _write_rows(self.path("summary.csv"), header,
                    ([format_cell(entry[h]) for h in header] for entry in summary))
        self._write_series(summary)
        self._write_table(summary)
        print(f"📊 [STORE] Summary of {len(summary)} cells -> {self.path('summary.csv')}")
        return summary

    def _write_series(self, summary: List[Dict[str, object]]):
        header = ["task", "method", "psnr_db", "metric", "mean", "std", "n"]
        rows = []
        for entry in summary:
            for metric in METRIC_COLUMNS:
                if entry[f"{metric}_mean"] is None:
                    continue
                rows.append([entry["task"], entry["method"], entry["psnr_db"], metric,
                             format_cell(entry[f"{metric}_mean"]),
                             format_cell(entry[f"{metric}_std"]),
                             str(entry[f"{metric}_n"])])
        _write_rows(self.path("series.csv"), header, rows)

    def _write_table(self, summary: List[Dict[str, object]]):
        """Methods as rows, one column per (PSNR, metric) pair"""
        if not summary:
            return
        metrics = TABLE_METRICS[Task(summary[0]["task"])]
        grid = list(dict.fromkeys(entry["psnr_db"] for entry in summary))
        methods = list(dict.fromkeys(entry["method"] for entry in summary))
        lookup = {(e["method"], e["psnr_db"]): e for e in summary}

        header = ["method"] + [f"{psnr}:{label}" for psnr in grid for label, _ in metrics]
        rows = []
        for method in methods:
            row = [method]
            for psnr in grid:
                entry = lookup.get((method, psnr))
                for _, column in metrics:
                    row.append("" if entry is None else format_cell(entry[f"{column}_mean"]))
            rows.append(row)
        _write_rows(self.path("table.csv"), header, rows)

    # ------------------------------------------------------------------
    # Artefacts
    # ------------------------------------------------------------------

    def write_diagnostics(self, outcomes: List[TrialOutcome]) -> int:
        written = 0
        for outcome in outcomes:
            if outcome.diagnostics is None:
                continue
            r = outcome.result
            directory = self.path("diagnostics")
            os.makedirs(directory, exist_ok=True)
            name = f"{r.task.value}_{r.method.value}_psnr{r.psnr_index}_trial{r.trial}.csv"
            diag = outcome.diagnostics
            steps = range(len(diag["lambda"]) - 1, 0, -1)
            _write_rows(os.path.join(directory, name), ["step", "lambda", "gamma", "residual"],
                        ([str(t), format_cell(float(diag["lambda"][t])),
                          format_cell(float(diag["gamma"][t])),
                          format_cell(float(diag["residual"][t]))] for t in steps))
            written += 1
        return written

    def write_audition(self, outcomes: List[TrialOutcome], codec: Optional[FrameCodec]) -> int:
        """Latent CSVs for every audition trial; WAVs too when the latents are codec frames"""
        written = 0
        for outcome in outcomes:
            if outcome.latents is None:
                continue
            r = outcome.result
            stem = f"{r.task.value}_{r.method.value}_psnr{r.psnr_index}_trial{r.trial}"
            for kind, latent in outcome.latents.items():
                if codec is None:
                    write_latents_csv(self.path("latents", f"{stem}_{kind}.csv"), latent)
                else:
                    frames = np.asarray(latent).reshape(-1, codec.retained)
                    write_latents_csv(self.path("latents", f"{stem}_{kind}.csv"), frames)
                    write_wav(self.path("audio", f"{stem}_{kind}.wav"), decode(codec, frames))
            written += 1
        return written

    def write_manifest(self, cfg: ExperimentConfig):
        path = self.path("run_manifest.json")
        manifest = {
            "timestamp": datetime.now().isoformat(),
            "config": cfg.model_dump(mode="json"),
        }
        tmp_path = path + ".tmp"
        with open(tmp_path, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2)
        os.replace(tmp_path, path)
