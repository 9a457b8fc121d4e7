"""
Report models and the element-definition JSON codec.
"""
