"""Report generation for verification and simulation runs."""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

from jinja2 import Template

from config.settings import DEFAULT_REPORT_FORMAT, REPORT_FORMATS

logger = logging.getLogger(__name__)

TEXT_TEMPLATE = """FERMIONIC CONTROL VERIFICATION REPORT
{{ '=' * 80 }}
Mode:       {{ mode }}
Circuit:    {{ circuit }}
Qubits:     {{ n_qubits }}
Coupling:   {{ coupling }}
Generated:  {{ generated_at }}
Result:     {{ 'PASS' if passed else 'FAIL' }}

Tolerances
{% for name, value in tolerances.items() %}  {{ name }}: {{ value }}
{% endfor %}
{% if fidelity is not none %}Process fidelity:      {{ '%.12f'|format(fidelity) }}
Worst state fidelity:  {{ '%.12f'|format(state_fidelity) }}
Worst leakage:         {{ '%.3e'|format(leakage) }}
{% endif %}{% if schedule %}
Schedule
  segments:        {{ schedule.segment_count }}
  pulses:          {{ schedule.pulse_count }}
  total duration:  {{ '%.6f'|format(schedule.total_duration) }}
{% endif %}{% if residuals %}
Diagram residuals
{% for entry in residuals %}  [{{ entry.index }}] {{ entry.gate }}: {{ '%.3e'|format(entry.residual) }}
{% endfor %}{% endif %}"""

HTML_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>Fermionic Control Verification Report</title>
    <style>
        body { font-family: Arial, sans-serif; max-width: 1000px; margin: 0 auto; padding: 20px; background-color: #f5f5f5; }
        .header { background-color: #2c3e50; color: white; padding: 20px; border-radius: 5px; }
        .section { background-color: white; padding: 20px; margin: 20px 0; border-radius: 5px; }
        .pass { color: #27ae60; font-weight: bold; }
        .fail { color: #c0392b; font-weight: bold; }
        table { width: 100%; border-collapse: collapse; }
        th, td { padding: 8px; text-align: left; border-bottom: 1px solid #ddd; }
        th { background-color: #3498db; color: white; }
    </style>
</head>
<body>
    <div class="header">
        <h1>Fermionic Control Verification Report</h1>
        <p>Mode: {{ mode }} &middot; Circuit: {{ circuit }} &middot; {{ n_qubits }} qubits &middot; g = {{ coupling }}</p>
        <p>Generated: {{ generated_at }}</p>
    </div>

    <div class="section">
        <h2>Result: <span class="{{ 'pass' if passed else 'fail' }}">{{ 'PASS' if passed else 'FAIL' }}</span></h2>
        <table>
            <tr><th>Quantity</th><th>Value</th><th>Tolerance</th></tr>
            {% if fidelity is not none %}
            <tr><td>Process fidelity</td><td>{{ '%.12f'|format(fidelity) }}</td><td>1 - {{ tolerances.fidelity }}</td></tr>
            <tr><td>Worst state fidelity</td><td>{{ '%.12f'|format(state_fidelity) }}</td><td>1 - {{ tolerances.fidelity }}</td></tr>
            <tr><td>Worst leakage</td><td>{{ '%.3e'|format(leakage) }}</td><td>{{ tolerances.leakage }}</td></tr>
            {% endif %}
            {% if residuals %}
            <tr><td>Largest diagram residual</td><td>{{ '%.3e'|format(max_residual) }}</td><td>{{ tolerances.residual }}</td></tr>
            {% endif %}
        </table>
    </div>

    {% if schedule %}
    <div class="section">
        <h2>Schedule</h2>
        <p>{{ schedule.segment_count }} segments, {{ schedule.pulse_count }} instantaneous pulses, total duration {{ '%.6f'|format(schedule.total_duration) }}</p>
    </div>
    {% endif %}

    {% if residuals %}
    <div class="section">
        <h2>Diagram Residuals</h2>
        <table>
            <tr><th>#</th><th>Gate</th><th>Residual</th></tr>
            {% for entry in residuals %}
            <tr><td>{{ entry.index }}</td><td>{{ entry.gate }}</td><td>{{ '%.3e'|format(entry.residual) }}</td></tr>
            {% endfor %}
        </table>
    </div>
    {% endif %}
</body>
</html>
"""


class ReportGenerator:
    """Write run reports as JSON (normative), text or HTML."""

    def __init__(self, output_dir: str = 'output'):
        """
        Initialize report generator.

        Args:
            output_dir: Directory for output files
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def generate_report(self, report_data: Dict, format: Optional[str] = None,
                        output_filename: Optional[str] = None) -> str:
        """
        Generate a report file.

        Args:
            report_data: Report dictionary (Report.to_dict())
            format: Report format (json, txt, html)
            output_filename: Custom output filename

        Returns:
            Path to generated report
        """
        format = format or DEFAULT_REPORT_FORMAT
        if format not in REPORT_FORMATS:
            raise ValueError(f"Unsupported report format: {format}")

        if not output_filename:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            output_filename = f'report_{timestamp}.{format}'
        output_path = self.output_dir / output_filename

        if format == 'json':
            content = json.dumps(report_data, indent=2, sort_keys=True)
        else:
            content = self.render(report_data, format)

        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(content)
        logger.debug("Wrote %s report to %s", format, output_path)
        return str(output_path)

    def render(self, report_data: Dict, format: str) -> str:
        """Render the txt or html view of a report."""
        template = Template(HTML_TEMPLATE if format == 'html' else TEXT_TEMPLATE)
        residuals = report_data.get('residuals', [])
        context = dict(report_data)
        context['passed'] = report_data.get('pass', False)
        context['max_residual'] = max((r['residual'] for r in residuals), default=0.0)
        return template.render(**context)
