"""Run orchestration."""

from .inversion_pipeline import InversionPipeline, diagnose, make_testcase

__all__ = ["InversionPipeline", "diagnose", "make_testcase"]
