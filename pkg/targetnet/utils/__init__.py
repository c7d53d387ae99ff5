"""Utility modules: configuration, logging, serialization and CSV reporting"""
