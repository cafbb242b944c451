"""instructforge: forge constraint-rich instruction-tuning datasets from seed queries."""

__version__ = "0.1.0"
