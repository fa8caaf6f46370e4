"""Concrete NPC spaces."""

from .euclidean import Euclidean
from .hyperboloid import Hyperboloid
from .product import ProductSpace
from .spd import SpdLogCholesky, SpdLogEuclidean
from .spider import Spider

__all__ = [
    "Euclidean",
    "Hyperboloid",
    "ProductSpace",
    "SpdLogCholesky",
    "SpdLogEuclidean",
    "Spider",
]
