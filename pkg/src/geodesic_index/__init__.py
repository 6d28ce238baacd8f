"""Index iteration, common index jumps and Morse accounting for closed geodesics."""

__version__ = "0.1.0"
