"""Conditional EVT and Gaussian risk measures."""
