"""
Verification suites, species discovery and suite reports
"""
