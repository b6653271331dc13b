# report.py - per-rule summary table and accuracy-vs-learning-rate scatter data
from pathlib import Path

import pandas as pd

from errors import ReportError
from plasticity import ACTIVE_PARAMS, RuleId
from trainer import EvaluationRecord

SCATTER_COLUMNS = ["rule", "alpha", "beta1", "beta2", "beta3", "test_accuracy", "best_rule_flag"]


def scatter_frame(entries: list[EvaluationRecord]) -> pd.DataFrame:
    """Every successful evaluation, flagged when it belongs to the best rule."""
    ok = [e for e in entries if e.status == "ok"]
    if not ok:
        raise ReportError("log holds no successful evaluations")
    df = pd.DataFrame(
        {
            "rule": [e.rule.value for e in ok],
            "alpha": [e.alpha for e in ok],
            "beta1": [e.beta1 for e in ok],
            "beta2": [e.beta2 for e in ok],
            "beta3": [e.beta3 for e in ok],
            "test_accuracy": [e.test_accuracy for e in ok],
        }
    )
    best_rule = df.loc[df["test_accuracy"].idxmax(), "rule"]
    df["best_rule_flag"] = (df["rule"] == best_rule).astype(int)
    return df[SCATTER_COLUMNS]


def summary_frame(entries: list[EvaluationRecord]) -> pd.DataFrame:
    """Best accuracy per rule (Table order); the overall best row is marked."""
    if not entries:
        raise ReportError("log is empty")
    scatter = scatter_frame(entries)
    rows = []
    for rule in RuleId:
        evaluated = [e for e in entries if e.rule == rule]
        mine = scatter[scatter["rule"] == rule.value]
        best = mine.loc[mine["test_accuracy"].idxmax()] if len(mine) else None
        rows.append(
            {
                "rule": rule.value,
                "evaluations": len(evaluated),
                "failed": sum(e.status == "failed" for e in evaluated),
                "best_accuracy": best["test_accuracy"] if best is not None else float("nan"),
                "best_alpha": best["alpha"] if best is not None else float("nan"),
                "active_params": ",".join(ACTIVE_PARAMS[rule]),
            }
        )
    table = pd.DataFrame(rows)
    overall = scatter.loc[scatter["test_accuracy"].idxmax(), "rule"]
    table["best"] = (table["rule"] == overall).map({True: "*", False: ""})
    return table


def gmr_shape_check(scatter: pd.DataFrame, top: int = 10) -> dict:
    """Share of the top GMR configurations with beta2 small (< 0.1) and beta3 > 0.6."""
    gmr = scatter[scatter["rule"] == RuleId.GMR.value].nlargest(top, "test_accuracy")
    if gmr.empty:
        return {"gmr_configs": 0, "beta2_small": None, "beta3_large": None}
    return {
        "gmr_configs": len(gmr),
        "beta2_small": float((gmr["beta2"] < 0.1).mean()),
        "beta3_large": float((gmr["beta3"] > 0.6).mean()),
    }


def write_report(entries: list[EvaluationRecord], csv_path: str | Path) -> str:
    """Write the scatter CSV and return the printable summary."""
    table = summary_frame(entries)
    scatter = scatter_frame(entries)
    scatter.to_csv(csv_path, index=False)

    check = gmr_shape_check(scatter)
    lines = [
        table.to_string(index=False, float_format=lambda v: f"{v:.4f}"),
        "",
        f"scatter rows: {len(scatter)} -> {csv_path}",
    ]
    if check["gmr_configs"]:
        lines.append(
            f"GMR top-{check['gmr_configs']}: beta2<0.1 in {check['beta2_small']:.0%}, "
            f"beta3>0.6 in {check['beta3_large']:.0%}"
        )
    return "\n".join(lines)
