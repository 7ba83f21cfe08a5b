"""
Tests initialization
"""
