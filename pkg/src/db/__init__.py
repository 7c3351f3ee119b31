# This file makes db a Python package 