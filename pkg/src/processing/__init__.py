"""Numeric processing chain: geometry, signal, raw simulation, focusing, products, calibration, quality"""
