"""Optional figure for campaign reports: the two compared sides and the residuals."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 3.0),
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.linewidth": 0.6,
    "lines.linewidth": 0.8,
    "lines.markersize": 3,
    "legend.fontsize": 7,
    "savefig.dpi": 200,
}


def report_figure(report, path) -> Path:
    """Scatter of ``value_direct`` against ``value_closed_form`` next to a residual plot."""
    path = Path(path)
    cases = [c for c in report.cases
             if math.isfinite(c.value_closed_form) and math.isfinite(c.value_direct)]
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, constrained_layout=True)
        ok = [c for c in cases if c.passed]
        bad = [c for c in cases if not c.passed]
        for group, color, label in ((ok, "tab:blue", "pass"), (bad, "tab:red", "fail")):
            if group:
                ax0.plot([c.value_closed_form for c in group], [c.value_direct for c in group],
                         "o", color=color, alpha=0.7, label=f"{label} ({len(group)})")
        if cases:
            lo = min(min(c.value_closed_form, c.value_direct) for c in cases)
            hi = max(max(c.value_closed_form, c.value_direct) for c in cases)
            ax0.plot([lo, hi], [lo, hi], "k--", lw=0.6)
            ax0.legend(frameon=False)
        ax0.set_xlabel("reference")
        ax0.set_ylabel("computed")
        ax0.set_title(report.command, fontsize=9)

        res = [max(c.residual, 1e-18) for c in report.cases if math.isfinite(c.residual)]
        ax1.semilogy(range(len(res)), res, ".", color="0.3")
        ax1.set_xlabel("case")
        ax1.set_ylabel("residual")
        fig.savefig(path)
        plt.close(fig)
    return path
