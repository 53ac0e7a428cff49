from .EvaluationReport import EvaluationReport, ReportRow
from .renderers import evaluate_zeta_columns, render_curve, render_table3, render_table4

__all__ = ['EvaluationReport', 'ReportRow', 'evaluate_zeta_columns', 'render_curve', 'render_table3', 'render_table4']
