"""lochaus - Hausdorff and local Hausdorff dimension of finite metric samples."""

__version__ = "0.1.0"
__description__ = "Dimension, measure and regularity estimates for finite metric samples"
