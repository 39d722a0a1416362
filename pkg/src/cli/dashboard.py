from typing import List

from colorama import Fore, Style, init

from .verify import CriterionRecord, SuiteReport


def _format_value(value) -> str:
    if value is None:
        return '-'
    return f"{value:.6g}"


class Dashboard:
    """Pass/fail table for an acceptance suite run"""

    def __init__(self, config=None):
        self.config = config or {}
        init(autoreset=True)

    def status(self, record: CriterionRecord) -> str:
        if record.skipped:
            return f"{Fore.YELLOW}SKIP{Style.RESET_ALL}"
        if record.passed:
            return f"{Fore.GREEN}PASS{Style.RESET_ALL}"
        return f"{Fore.RED}FAIL{Style.RESET_ALL}"

    def render(self, report: SuiteReport) -> List[str]:
        sections = [f"\nAcceptance Suite ({report.suite}, seed {report.seed})"]
        sections.append("-" * 78)
        sections.append(f"{'criterion':<22}{'observed':>14}{'expected':>14}{'tolerance':>12}  status")
        sections.append("-" * 78)
        for record in report.records:
            sections.append(f"{record.id:<22}{_format_value(record.observed):>14}"
                            f"{_format_value(record.expected):>14}{_format_value(record.tolerance):>12}  "
                            f"{self.status(record)}")
        sections.append("-" * 78)
        passed = sum(1 for r in report.records if r.passed and not r.skipped)
        failed = sum(1 for r in report.records if not r.passed and not r.skipped)
        skipped = sum(1 for r in report.records if r.skipped)
        sections.append(f"{passed} passed, {failed} failed, {skipped} skipped")
        return sections

    def display(self, report: SuiteReport) -> bool:
        """Print the table; False if rendering failed"""
        try:
            for section in self.render(report):
                print(section)
            return True
        except Exception as e:
            print(f"Error displaying suite report: {e}")
            return False
