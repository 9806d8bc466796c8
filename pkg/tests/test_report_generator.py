"""Tests for report rendering and CSV exports."""

import json
import os
import shutil
import tempfile
import unittest

import pandas as pd

from exports import RESIDUAL_COLUMNS, SUMMARY_COLUMNS, Exporter
from report_generator import ReportGenerator


def _report(passed=True):
    return {
        'mode': 'simulate',
        'circuit': 'cz.circ',
        'n_qubits': 2,
        'coupling': 1.0,
        'tolerances': {'fidelity': 1e-6, 'leakage': 1e-8, 'residual': 1e-9},
        'fidelity': 1.0,
        'state_fidelity': 0.999999999999,
        'leakage': 2.5e-16,
        'residuals': [
            {'index': 0, 'gate': 'h 0', 'residual': 3e-16},
            {'index': 1, 'gate': 'diag 0 1 0 0 0 3.14159', 'residual': 1e-15},
        ],
        'schedule': {'segment_count': 1, 'pulse_count': 1, 'total_duration': 3.141592653589793},
        'pass': passed,
        'generated_at': '2024-06-01T00:00:00+00:00',
    }


class TestReportGenerator(unittest.TestCase):
    """Test report generation."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.generator = ReportGenerator(self.temp_dir)

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_json_report(self):
        """Test the JSON report."""
        path = self.generator.generate_report(_report(), format='json', output_filename='r.json')
        self.assertEqual(path, os.path.join(self.temp_dir, 'r.json'))
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        self.assertEqual(data, _report())

    def test_text_report(self):
        """Test the text report."""
        path = self.generator.generate_report(_report(), format='txt', output_filename='r.txt')
        with open(path, 'r', encoding='utf-8') as f:
            content = f.read()
        self.assertIn('Result:     PASS', content)
        self.assertIn('Process fidelity:      1.000000000000', content)
        self.assertIn('[1] diag 0 1 0 0 0 3.14159: 1.000e-15', content)
        self.assertIn('total duration:  3.141593', content)

    def test_html_report(self):
        """Test the HTML report of a failing run."""
        content = self.generator.render(_report(passed=False), 'html')
        self.assertIn('<span class="fail">FAIL</span>', content)
        self.assertIn('Largest diagram residual</td><td>1.000e-15', content)

    def test_diagram_only_report(self):
        """Test a report with residuals only."""
        data = _report()
        data.update(fidelity=None, state_fidelity=None, leakage=None, schedule=None)
        content = self.generator.render(data, 'txt')
        self.assertNotIn('Process fidelity', content)
        self.assertNotIn('Schedule', content)

    def test_default_filename(self):
        """Test the timestamped default filename."""
        path = self.generator.generate_report(_report())
        self.assertTrue(path.endswith('.json'))
        self.assertTrue(os.path.exists(path))

    def test_unsupported_format(self):
        """Test an unsupported report format."""
        with self.assertRaises(ValueError):
            self.generator.generate_report(_report(), format='pdf')


class TestExporter(unittest.TestCase):
    """Test CSV exports."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.exporter = Exporter(self.temp_dir)

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_batch_summary(self):
        """Test the batch summary CSV."""
        rows = [
            {'circuit': 'a.circ', 'mode': 'simulate', 'n_qubits': 2, 'fidelity': 1.0, 'pass': True, 'error': ''},
            {'circuit': 'b.circ', 'error': "unknown gate 'q' at line 2", 'pass': False},
        ]
        path = self.exporter.export_batch_summary(rows, 'summary.csv')
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), SUMMARY_COLUMNS)
        self.assertEqual(list(frame['pass']), [True, False])
        self.assertEqual(frame['error'][1], "unknown gate 'q' at line 2")

    def test_residuals(self):
        """Test the residual CSV."""
        path = self.exporter.export_residuals(_report(), 'residuals.csv')
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), RESIDUAL_COLUMNS)
        self.assertEqual(list(frame['gate']), ['h 0', 'diag 0 1 0 0 0 3.14159'])

    def test_empty_residuals(self):
        """Test a residual CSV with no rows."""
        path = self.exporter.export_residuals({'residuals': []}, 'empty.csv')
        self.assertEqual(len(pd.read_csv(path)), 0)


if __name__ == '__main__':
    unittest.main()
