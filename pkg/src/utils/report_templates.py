"""Text templates for run reports."""

from jinja2 import Environment, StrictUndefined

_ENV = Environment(
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


class ReportTemplates:
    """Collection of report templates."""

    MISMATCH_TABLE = """\
Normalized data mismatch ({{ n_history }} history data)

{{ "%-12s"|format("ensemble") }} {{ "%8s"|format("members") }} {{ "%14s"|format("mean") }} {{ "%14s"|format("std") }}
{{ "-" * 51 }}
{% for row in rows %}
{{ "%-12s"|format(row.label) }} {{ "%8d"|format(row.members) }} {{ "%14.6g"|format(row.mean) }} {{ "%14.6g"|format(row.std) }}
{% endfor %}
"""

    MANIFEST_SUMMARY = """\
method: {{ manifest.method.value }}
data: {{ manifest.n_data }} elements, {{ manifest.n_history }} history
members: {{ manifest.n_members }} prior, {{ manifest.n_posterior }} posterior
{% if manifest.svd_ranks %}
svd ranks: {{ manifest.svd_ranks|join(", ") }}
{% endif %}
{% if manifest.unconverged_samples %}
unconverged samples: {{ manifest.unconverged_samples }}
{% endif %}
inversion time: {{ "%.3f"|format(manifest.inversion_seconds) }} s
"""

    @staticmethod
    def mismatch_table(rows: list[dict], n_history: int) -> str:
        """Render prior/posterior mismatch statistics as a fixed-width table.

        Args:
            rows: Dicts with label, members, mean and std
            n_history: Number of history data behind the statistic

        Returns:
            Formatted table
        """
        template = _ENV.from_string(ReportTemplates.MISMATCH_TABLE)
        return template.render(rows=rows, n_history=n_history)

    @staticmethod
    def manifest_summary(manifest) -> str:
        template = _ENV.from_string(ReportTemplates.MANIFEST_SUMMARY)
        return template.render(manifest=manifest)
