"""Seeded experiment runner: suites, records, reports and the command line."""
from __future__ import annotations

from .suites import SUITES, ExperimentConfig, emit_report, run_suite
