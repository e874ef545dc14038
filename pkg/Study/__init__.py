"""Monte Carlo replication harness and violation backtests."""
