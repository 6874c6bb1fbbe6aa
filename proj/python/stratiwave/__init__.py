"""Stratified gravity-capillary wave toolkit.

Thin Python layer over the compiled core: configuration handling, dispersion
matrices, bifurcation-point search with assumption verification, swirl
continuation, and first-order wavefield reconstruction.
"""

try:
    # wheel layout: the extension lives inside this package
    from ._stratiwave import *  # noqa: F401,F403
    from ._stratiwave import __version__  # noqa: F401
except ImportError:
    # in-tree builds put the extension next to the build directory on sys.path
    from _stratiwave import *  # noqa: F401,F403
    from _stratiwave import __version__  # noqa: F401
