"""
Bridge between the kp command line and the core modules.

This package contains the command/response protocol, the command handler
and SVG rendering.
"""
