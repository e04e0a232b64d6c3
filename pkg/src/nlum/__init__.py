"""Nearly-linear imprecise probability models on finite partitions."""

__version__ = "0.1.0"
