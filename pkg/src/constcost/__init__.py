"""Constant-cost communication laboratory."""
