"""
Test suite for cantor-dynamics.
"""
