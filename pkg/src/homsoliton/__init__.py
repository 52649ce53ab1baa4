"""Exact verification of algebraic Ricci solitons on homogeneous spaces."""
