"""CSV exports of batch summaries and per-gate residual tables."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    'circuit', 'mode', 'n_qubits', 'max_residual', 'fidelity', 'state_fidelity',
    'leakage', 'segment_count', 'total_duration', 'pass', 'report', 'error',
]
RESIDUAL_COLUMNS = ['index', 'gate', 'residual']


class Exporter:
    """Export run results as CSV tables."""

    def __init__(self, output_dir: str = 'output'):
        """
        Initialize exporter.

        Args:
            output_dir: Directory for export files
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, filename: Optional[str], prefix: str) -> Path:
        if not filename:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            filename = f'{prefix}_{timestamp}.csv'
        return self.output_dir / filename

    def export_batch_summary(self, rows: List[Dict], filename: Optional[str] = None) -> str:
        """One row per circuit file; columns follow SUMMARY_COLUMNS."""
        output_path = self._path(filename, 'batch_summary')
        frame = pd.DataFrame(rows).reindex(columns=SUMMARY_COLUMNS)
        frame.to_csv(output_path, index=False)
        logger.debug("Wrote %d summary rows to %s", len(frame), output_path)
        return str(output_path)

    def export_residuals(self, report: Dict, filename: Optional[str] = None) -> str:
        """Per-gate diagram residuals of one report."""
        output_path = self._path(filename, 'residuals')
        frame = pd.DataFrame(report.get('residuals', []), columns=RESIDUAL_COLUMNS)
        frame.to_csv(output_path, index=False)
        return str(output_path)
