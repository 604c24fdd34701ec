"""
Thread-safe memo tables for numerical kernels
"""
