"""
Posterior laws of the random probability measure given observed partitions
"""
