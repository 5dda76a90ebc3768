"""Warfarin dose-revision experiment toolkit.

Synthesizes longitudinal dose/INR cohorts, builds clinical and
dose-response feature sets, trains six regression families, and
compares maintenance-dose predictions with CI-based paired tests.
"""

__version__ = "0.1.0"
