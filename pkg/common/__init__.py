"""Shared SO(3) and jet utilities for CurvJet."""
