"""Energy-optimal rest-to-rest motion profiles for servo axes with
position-dependent inertia, parameterised by bounded Chebyshev series.
"""
__version__ = "0.1.0"
