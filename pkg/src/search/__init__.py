# This file makes search a Python package
