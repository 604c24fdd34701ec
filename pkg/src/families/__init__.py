"""
Closed-form Pitman-Yor and Mittag-Leffler specializations
"""
