"""
Core module for the PDPA lattice simulator
"""
