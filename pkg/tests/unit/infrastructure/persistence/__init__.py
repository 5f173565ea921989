"""Persistence layer infrastructure unit tests package."""
