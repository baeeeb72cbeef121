"""Sea-ice mEVP stress-update kernels on dG quadrilateral meshes."""

__version__ = "0.1.0"
