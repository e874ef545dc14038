"""Semi-parametric tail index estimation."""
