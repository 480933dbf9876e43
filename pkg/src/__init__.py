"""
SAR product toolkit
Point-target simulation, focusing, Level-1 product formation, calibration
and image quality analysis for small X-band SAR satellites
"""
__version__ = "1.0.0"
