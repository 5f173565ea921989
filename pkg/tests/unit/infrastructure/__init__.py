"""Infrastructure unit tests package."""
