"""Solvers and analysis tools for absolute value equations."""
