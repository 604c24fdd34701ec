"""
Gibbs-type models and their prior partition laws
"""
