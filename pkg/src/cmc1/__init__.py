"""Constant mean curvature one surfaces in hyperbolic space.

Cauchy problems for the Liouville equation, Bjorling-type surfaces built from
a curve and a normal field, mesh export and a command-line front end.
"""
