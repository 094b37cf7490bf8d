"""Deterministic supply-chain simulator: SCOR core processes plus the
value-chain extensions (support, market, research, develop, sell), with
an adaptive-learning customer-satisfaction model and KPI reporting."""

__version__ = "0.1.0"
