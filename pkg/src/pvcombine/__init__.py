"""Multi-resolution solar PV forecasting with PSO-weighted forecast combination."""

__version__ = "0.1.0"
