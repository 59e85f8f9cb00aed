#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Simpson Scan: trend-reversal detection in tabular data
Main entry point for the command line
"""

from src.cli import main

if __name__ == "__main__":
    main()
