"""
Tests package for the kpsolitons project.
"""
