"""Curvature, co-rotational, updating and oracle services for the CurvJet backend."""
