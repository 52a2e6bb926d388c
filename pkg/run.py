#!/usr/bin/env python3
"""
Main entry point for the Mera agent framework
Run this file with --inference, --create_dataset or --training
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from backend.app import main

if __name__ == '__main__':
    sys.exit(main())
