"""Job running, reporting and the acceptance suite."""

from .acceptance import GROUPS, PROFILES, acceptance_suite, run_group
from .jobs import COMMANDS, JobError, JobSpec, parse_grid, run
from .report import Check, Report, canonical, dumps

__all__ = ["GROUPS", "PROFILES", "acceptance_suite", "run_group", "COMMANDS", "JobError", "JobSpec",
           "parse_grid", "run", "Check", "Report", "canonical", "dumps"]
