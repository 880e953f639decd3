"""Chern-Simons forms and Ricci flow on Berger spheres and warped products of spheres."""

import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
