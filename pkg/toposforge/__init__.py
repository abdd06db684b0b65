"""Executable workbench for the internal language of sheaf toposes"""

__version__ = "0.1.0"
