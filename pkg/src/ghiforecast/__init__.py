"""Next-minute GHI forecasting on SURFRAD station data."""

__version__ = "0.1.0"
