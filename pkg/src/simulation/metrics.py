"""
Suite reports and their JSON / CSV writers
"""
import json
from dataclasses import dataclass, field
from typing import Optional

import pandas as pd

CSV_COLUMNS = ['suite', 'case_id', 'statistic_name', 'statistic', 'p_or_gap', 'n', 'seed', 'pass']


@dataclass
class CaseResult:
    """One verification case.

    Statistical cases carry a p-value compared against the report's
    alpha_level; exact cases carry a gap compared against tolerance.
    """
    case_id: str
    statistic_name: str
    statistic: Optional[float]
    p_or_gap: Optional[float]
    n_samples: int
    seed: int
    passed: bool
    kind: str = 'statistical'
    tolerance: Optional[float] = None
    stream: int = 0
    error: Optional[str] = None

    def to_dict(self):
        out = {
            'case_id': self.case_id,
            'statistic_name': self.statistic_name,
            'statistic': self.statistic,
            'p_or_gap': self.p_or_gap,
            'n_samples': self.n_samples,
            'seed': self.seed,
            'stream': self.stream,
            'pass': self.passed,
            'kind': self.kind,
        }
        if self.tolerance is not None:
            out['tolerance'] = self.tolerance
        if self.error is not None:
            out['error'] = self.error
        return out


@dataclass
class SuiteReport:
    suite_name: str
    cases: list
    alpha_level: float
    config: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    @property
    def overall_pass(self):
        return bool(self.cases) and all(case.passed for case in self.cases)

    def failures(self):
        return [case for case in self.cases if not case.passed]

    def to_dict(self):
        out = {
            'suite_name': self.suite_name,
            'overall_pass': self.overall_pass,
            'alpha_level': self.alpha_level,
            'cases': [case.to_dict() for case in self.cases],
            'config': self.config,
        }
        if self.wall_time is not None:
            out['wall_time'] = self.wall_time
        return out

    def to_rows(self):
        return [{
            'suite': self.suite_name,
            'case_id': case.case_id,
            'statistic_name': case.statistic_name,
            'statistic': case.statistic,
            'p_or_gap': case.p_or_gap,
            'n': case.n_samples,
            'seed': case.seed,
            'pass': case.passed,
        } for case in self.cases]


class MetricsCollector:
    """Accumulates suite reports and writes them out."""

    def __init__(self):
        self.reports = []

    def record_suite(self, report):
        self.reports.append(report)
        return report

    @property
    def overall_pass(self):
        return all(report.overall_pass for report in self.reports)

    def generate_report(self):
        """One suite serializes as its own document, several as a list with a summary."""
        if len(self.reports) == 1:
            return self.reports[0].to_dict()
        return {
            'summary': {
                'total_suites': len(self.reports),
                'passed': sum(report.overall_pass for report in self.reports),
                'overall_pass': self.overall_pass,
            },
            'suites': [report.to_dict() for report in self.reports],
        }

    def summary_frame(self):
        rows = [row for report in self.reports for row in report.to_rows()]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def save_to_json(self, filename):
        """Floats keep their shortest round-trip repr."""
        with open(filename, 'w') as f:
            json.dump(self.generate_report(), f, indent=2)
        return filename

    def save_to_csv(self, filename):
        self.summary_frame().to_csv(filename, index=False, float_format='%.17g')
        return filename
