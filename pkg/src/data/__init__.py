# This file makes data a Python package
