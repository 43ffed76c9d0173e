# Copyright 2025 H2so4 Consulting LLC
# app: the primrank command line (typer); see app/main.py.
