# Copyright 2025 H2so4 Consulting LLC
# core: free-group algorithms. words -> agraphs -> whitehead -> pirank -> genericity,
# with wordmeasure for symmetric-group experiments and exporters for JSON/DOT output.
