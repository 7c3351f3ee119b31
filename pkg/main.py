#!/usr/bin/env python3
"""
HOC-Tree spatio-temporal range search.

Usage:
    python main.py <command> [flags]

Commands:
    gen     generate a synthetic uniform or clustered dataset
    build   build an index file from a dataset CSV
    query   run one range query against an index file
    bench   time the index against the linear scan
    sweep   bench over a range of query extents
    info    print tree statistics of an index file
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
