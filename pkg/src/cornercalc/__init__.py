"""cornercalc: exact chain-level homology, cohomology and bordism for polytopes.

The kernel works with compact convex polytopes carrying exact rational vertices,
oriented by explicit frames, mapped by affine maps into flat targets (a point,
Euclidean space, or a torus). On top of that it builds boundary operators with
matched-pair corner cancellation, fibre products with exact orientation signs,
gauge-tagged chains and cochains with cup/cap products, finite group quotients
and orbifold strata, and finitely presented bordism groups.
"""

__version__ = "0.1.0"
