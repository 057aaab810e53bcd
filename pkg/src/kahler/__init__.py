"""Kähler angle and self-shrinker geometry of parametric surfaces in C^2."""
