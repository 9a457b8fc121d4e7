"""
Small helpers: YAML loading, digit-word formatting, exact rational output.
"""
