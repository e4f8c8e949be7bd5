"""Multi-echelon supply-chain simulation with liquid-network + boosted-tree forecasting."""

__version__ = "0.1.0"
