from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

from eigenfactors.models import DerivativeCheck, EvaluationRow, OptReport
from eigenfactors.utils import write_text


class ReportWriter:
    def checks_to_json(self, checks: List[DerivativeCheck]) -> str:
        payload = [dict(asdict(c), passed=c.passed) for c in checks]
        return json.dumps(payload, indent=2, ensure_ascii=True)

    def checks_to_markdown(self, checks: List[DerivativeCheck]) -> str:
        lines = ["# Derivative checks", ""]
        if not checks:
            lines.append("No checks were run.\n")
            return "\n".join(lines)
        lines.append("| check | max error | threshold | trials | result |")
        lines.append("|---|---|---|---|---|")
        for c in checks:
            result = "pass" if c.passed else "FAIL"
            lines.append(f"| {c.name} | {c.max_error:.3e} | {c.threshold:.1e} | {c.trials} | {result} |")
        failed = [c.name for c in checks if not c.passed]
        lines.append("")
        if failed:
            lines.append(f"**{len(failed)} failed:** {', '.join(failed)}")
        else:
            lines.append("All checks passed.")
        lines.append("")
        return "\n".join(lines)

    def run_to_markdown(
        self,
        report: OptReport,
        initial: Optional[EvaluationRow] = None,
        final: Optional[EvaluationRow] = None,
    ) -> str:
        lines = ["# Optimization run", ""]
        start = report.trace[0].cost if report.trace else float("nan")
        lines.append(f"**Status:** {report.status}")
        lines.append(f"**Iterations:** {report.iterations}")
        lines.append(f"**Cost:** {start:.6e} -> {report.cost:.6e}")
        rejected = sum(1 for r in report.trace if not r.accepted)
        lines.append(f"**Rejected steps:** {rejected}")
        lines.append("")
        if initial is not None and final is not None:
            lines.append("## Metrics")
            lines.append("")
            lines.append("| | rpe_trans [m] | rpe_rot [deg] | mme | mpv [m] |")
            lines.append("|---|---|---|---|---|")
            for label, row in (("initial", initial), ("optimized", final)):
                lines.append(
                    f"| {label} | {row.rpe_trans:.4e} | {row.rpe_rot:.4e} | {row.mme:.4f} | {row.mpv:.4e} |"
                )
            lines.append("")
        return "\n".join(lines)

    def write(self, path: Path, content: str) -> None:
        write_text(path, content)
