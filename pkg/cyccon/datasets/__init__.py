# Import dataset submodules so their @register_dataset decorators execute.
from cyccon.datasets import lapkiewicz as _lapkiewicz  # noqa: F401

__all__ = ["lapkiewicz"]
