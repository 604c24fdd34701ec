"""
Special functions and combinatorial numbers
"""
