# Robot 1 of the two-robot running example.
# The original figure is not available; weights and labels are reconstructed
# from the stated weights and the timing of the planned run tables.
name: T1
props: r1P pi
states: a b
init: a
edges:
  a b 2
  b a 2
labels:
  b: r1P pi
