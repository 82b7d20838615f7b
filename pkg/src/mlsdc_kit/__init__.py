"""Spectral deferred corrections and multi-level SDC for method-of-lines PDEs."""
