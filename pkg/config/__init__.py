"""Configuration package for the fermionic control simulator."""
