"""gridfill: unified vision tasks as grid-infilling diffusion, desk scale."""

__version__ = "0.1.0"
