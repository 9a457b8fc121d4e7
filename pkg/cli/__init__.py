"""
Command Line Interface for cantor-dynamics.
"""
