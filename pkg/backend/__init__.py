"""Backend package exposing the CurvJet evaluation service over FastAPI."""
