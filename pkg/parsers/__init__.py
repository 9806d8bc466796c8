"""Parser modules for circuit description files."""
