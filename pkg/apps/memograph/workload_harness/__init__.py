from memograph.memo_engine import TaskSpec

from .config import RunConfig, SweepGrid, load_json, load_model
from .experiment import RunReport, aggregate, reuse_ratios, run_experiment
from .family import (
    PHRASE_BANK,
    SCENARIO_DESCRIPTIONS,
    FamilyConfig,
    FamilyPlanner,
    MeterRanges,
    generate_family,
)
from .report import as_frame, read_report, render, report, run_rows
from .sweep import run_point, sweep
