"""Fuzzy keyword search, n-gram language identification and metadata agreement."""
