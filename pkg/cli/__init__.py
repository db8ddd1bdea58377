"""Command-line entry point for batch curvature jobs."""
