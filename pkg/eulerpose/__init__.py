"""
EulerPose - Euler-angle pose regression loss, angle-error metrics and a desk-scale SGD regressor
"""

__version__ = "0.1.0"
