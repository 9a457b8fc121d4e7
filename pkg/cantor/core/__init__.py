"""
Core computations: trees, automorphisms, group actions, dynamics, IRS sampling
and the example catalog.
"""
