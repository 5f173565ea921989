"""Domain models unit tests package."""
