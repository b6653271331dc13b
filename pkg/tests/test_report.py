import pandas as pd
import pytest

from errors import ReportError
from plasticity import RuleId
from report import SCATTER_COLUMNS, gmr_shape_check, scatter_frame, summary_frame, write_report
from space import Configuration
from trainer import EvaluationRecord


def record(rule, accuracy, alpha=0.1, beta2=0.5, beta3=0.5, status="ok"):
    config = Configuration(rule=rule, alpha=alpha, beta1=0.01, beta2=beta2, beta3=beta3)
    if status == "failed":
        return EvaluationRecord.failed(config, {"train_seed": 0}, "diverged")
    return EvaluationRecord(
        **config.model_dump(),
        seeds={"train_seed": 0},
        test_accuracy=accuracy,
        train_accuracy=accuracy,
        wall_time=0.0,
    )


def test_single_record_table():
    table = summary_frame([record(RuleId.SLR, 0.7)])
    assert len(table) == 8
    filled = table.dropna(subset=["best_accuracy"])
    assert filled["rule"].tolist() == ["SLR"]
    assert table.loc[table["best"] == "*", "rule"].tolist() == ["SLR"]


def test_table_best_matches_csv_max(tmp_path):
    entries = [
        record(RuleId.LMSR, 0.9, alpha=0.05),
        record(RuleId.LMSR, 0.6, alpha=0.5),
        record(RuleId.GMR, 0.8),
        record(RuleId.MOR, 0.0, status="failed"),
    ]
    path = tmp_path / "scatter.csv"
    write_report(entries, path)
    csv = pd.read_csv(path)
    table = summary_frame(entries)

    assert list(csv.columns) == SCATTER_COLUMNS
    assert len(csv) == 3
    best_row = table[table["best"] == "*"].iloc[0]
    assert best_row["best_accuracy"] == csv["test_accuracy"].max()
    assert best_row["rule"] == "LMSR"
    assert csv.loc[csv["best_rule_flag"] == 1, "rule"].unique().tolist() == ["LMSR"]
    assert table.loc[table["rule"] == "MOR", "failed"].item() == 1


def test_active_params_column():
    table = summary_frame([record(RuleId.GUR, 0.5)])
    assert table.loc[table["rule"] == "LMSR", "active_params"].item() == "alpha"
    assert table.loc[table["rule"] == "GUR", "active_params"].item() == "alpha,beta1,beta2,beta3"


def test_empty_log():
    with pytest.raises(ReportError):
        summary_frame([])


def test_only_failures():
    with pytest.raises(ReportError):
        scatter_frame([record(RuleId.MCR, 0.0, status="failed")])


def test_gmr_shape_check():
    entries = [
        record(RuleId.GMR, 0.9, beta2=0.01, beta3=0.8),
        record(RuleId.GMR, 0.85, beta2=0.05, beta3=0.7),
        record(RuleId.GMR, 0.80, beta2=0.5, beta3=0.2),
        record(RuleId.LMSR, 0.95),
    ]
    check = gmr_shape_check(scatter_frame(entries), top=2)
    assert check == {"gmr_configs": 2, "beta2_small": 1.0, "beta3_large": 1.0}


def test_report_text_mentions_gmr(tmp_path):
    text = write_report([record(RuleId.GMR, 0.9, beta2=0.01, beta3=0.8)], tmp_path / "s.csv")
    assert "GMR top-1" in text
    assert "scatter rows: 1" in text
