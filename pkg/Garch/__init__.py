"""AR(1)-GARCH(1,1) with Student-t innovations: likelihood, fit, filter, forecast, simulation."""
