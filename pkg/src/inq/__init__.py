"""Misconception-hunting analysis and tutoring engine for NovLang."""

__version__ = "0.1.0"
