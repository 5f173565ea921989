"""Interface layer: the command line."""
