"""
CIEL reasoning toolkit: epistemic logic with common knowledge of abstract agent groups
"""
__version__ = "1.0.0"
