# This file makes index a Python package
