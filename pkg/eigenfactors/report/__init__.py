from eigenfactors.report.writer import ReportWriter

__all__ = ["ReportWriter"]
