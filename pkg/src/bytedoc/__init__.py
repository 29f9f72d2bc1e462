"""Describe Ethereum contract interfaces from runtime bytecode."""

__version__ = "0.1.0"
