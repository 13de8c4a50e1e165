# src/report_writer.py

import os
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional

from src.config import LOG_FORMAT, LOG_LEVEL, REPORTS_DIR
from src.models import SampleRecord

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

CSV_VERDICT_COLUMNS = ["verdict"]


class ReportWriter:
    """Writes JSON reports and per-sample CSV files, by default under the reports directory."""
    def __init__(self, reports_dir: str = REPORTS_DIR):
        self.reports_dir = reports_dir

    def resolve(self, path: str) -> str:
        """A bare file name lands in the reports directory; anything with a directory part is kept."""
        if os.path.dirname(path):
            return path
        return os.path.join(self.reports_dir, path)

    def write_json(self, report: Any, path: str) -> Optional[str]:
        """Saves a report model (or a plain dict) as indented JSON. Returns the path written, or None."""
        target = self.resolve(path)
        try:
            os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
            data = report.to_json_dict() if hasattr(report, "to_json_dict") else report
            with open(target, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=4)
            logging.info(f"Report written to {target}.")
            return target
        except Exception as e:
            logging.error(f"Error writing JSON report {target}: {e}", exc_info=True)
            return None

    def write_scan_csv(self, records: Iterable[SampleRecord], path: str, arity: int) -> Optional[str]:
        """One row per sample: coordinates, verdict, then the forward, reverse and finite-difference gradients."""
        target = self.resolve(path)
        header = (
            [f"x{i}" for i in range(1, arity + 1)]
            + CSV_VERDICT_COLUMNS
            + [f"{prefix}{i}" for prefix in ("ad_fwd_", "ad_rev_", "fd_") for i in range(1, arity + 1)]
        )
        try:
            os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
            rows = 0
            with open(target, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                for record in records:
                    writer.writerow(self._row(record, arity))
                    rows += 1
            logging.info(f"Wrote {rows} sample rows to {target}.")
            return target
        except Exception as e:
            logging.error(f"Error writing CSV report {target}: {e}", exc_info=True)
            return None

    @staticmethod
    def _row(record: SampleRecord, arity: int) -> List[Any]:
        def cells(vector: Optional[List[float]]) -> List[Any]:
            return list(vector) if vector is not None else [""] * arity

        return (
            list(record.point)
            + [record.verdict]
            + cells(record.ad_forward)
            + cells(record.ad_reverse)
            + cells(record.fd_grad)
        )


def load_json_report(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
