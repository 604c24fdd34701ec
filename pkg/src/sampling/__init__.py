"""
Random variate generation
"""
