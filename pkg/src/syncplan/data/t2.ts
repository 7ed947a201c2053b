# Robot 2 of the two-robot running example (reconstructed, see t1.ts).
name: T2
props: r2P pi
states: a b c
init: a
edges:
  a b 2
  b a 2
  b c 1
  c b 1
labels:
  b: r2P pi
