from .harness import (
    FAST,
    FULL,
    ObjectSummary,
    SummaryStats,
    TrialConfig,
    TrialRecord,
    WindowNeverCompleted,
    average_grasp_velocity,
    check_campaign,
    format_summary_table,
    log_records,
    read_summary_csv,
    run_campaign,
    run_trial,
    write_summary_csv,
)

__all__ = [
    "log_records",
    "FAST",
    "FULL",
    "ObjectSummary",
    "SummaryStats",
    "TrialConfig",
    "TrialRecord",
    "WindowNeverCompleted",
    "average_grasp_velocity",
    "check_campaign",
    "format_summary_table",
    "read_summary_csv",
    "run_campaign",
    "run_trial",
    "write_summary_csv",
]
