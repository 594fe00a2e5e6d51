"""Init file for test package."""
