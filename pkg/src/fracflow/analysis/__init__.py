"""Verification studies built on the discretization and solvers."""
