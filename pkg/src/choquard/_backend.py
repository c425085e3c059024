"""Select the trajectory integrator: compiled extension if importable, else pure Python.

Set ``CHOQUARD_BACKEND=python`` to force the fallback.
"""

import os

from . import _shoot_py

python_shoot = _shoot_py.shoot

try:
    from ._shoot import shoot as compiled_shoot
except ImportError:  # extension not built
    compiled_shoot = None

if compiled_shoot is not None and os.environ.get("CHOQUARD_BACKEND", "").lower() != "python":
    shoot = compiled_shoot
    BACKEND = "compiled"
else:
    shoot = python_shoot
    BACKEND = "python"
